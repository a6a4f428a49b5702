use ckr_core::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn edge_list_never_panics(s in "\\PC*") {
        let _ = parse_edge_list(&s);
    }

    #[test]
    fn edge_list_like_text_never_panics(s in "(#.*\n)?[0-9]{0,2}\n([0-9 .e-]{0,12}\n){0,8}") {
        let _ = parse_edge_list(&s);
    }

    #[test]
    fn partition_text_never_panics(s in "[0-9 .\n-]{0,64}") {
        let _ = parse_partition(&s);
    }

    #[test]
    fn hierarchy_text_never_panics(s in "hierarchy [0-9]\n([-0-9]{1,2} [-0-9]{1,2} [-0-9]{1,2}\n){0,6}") {
        let _ = parse_hierarchy(&s);
    }

    #[test]
    fn ultrametric_text_never_panics(s in "ultrametric [0-9]\n([-0-9]{1,2} [0-9.]{1,3} [-0-9]{1,2}\n){0,6}") {
        let _ = parse_ultrametric(&s);
    }

    #[test]
    fn snapshot_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = DistanceOracle::from_bytes(&bytes);
    }

    #[test]
    fn corrupted_snapshot_never_panics(pos in 0usize..4096, val in any::<u8>()) {
        let g = WeightedGraph::new(6, (0..6).map(|i| (i, (i + 1) % 6, 1.0))).unwrap();
        let mut bytes = build_oracle(&g, 2, 3).unwrap().to_bytes();
        let i = pos % bytes.len();
        bytes[i] = val;
        if let Ok(o) = DistanceOracle::from_bytes(&bytes) {
            for x in 0..o.n() {
                let _ = o.query(0, x);
            }
        }
    }
}

#[test]
fn edge_list_errors_name_the_line() {
    let err = parse_edge_list("# header\n3\n0 1 1.0\n0 7 1.0\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    let err = parse_edge_list("2\n0 1 -1\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
}
