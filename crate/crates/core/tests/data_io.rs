use std::path::{Path, PathBuf};

use ogl_core::data_io::*;
use ogl_core::losses::{Dataset, SparseMatrix};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn nonzeros(d: &Dataset) -> Vec<(usize, usize, f64)> {
    d.features()
        .rows()
        .enumerate()
        .flat_map(|(r, (c, v))| c.iter().zip(v).map(move |(&c, &v)| (r, c, v)))
        .filter(|t| t.2 != 0.0)
        .collect()
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..12, 1usize..15).prop_flat_map(|(rows, cols)| {
        let row = proptest::collection::vec(prop_oneof![Just(0.0), -1e3f64..1e3], cols);
        (
            proptest::collection::vec(row, rows),
            proptest::collection::vec(any::<bool>(), rows),
        )
            .prop_map(move |(dense, labels)| {
                let rows: Vec<Vec<(usize, f64)>> = dense
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect())
                    .collect();
                let labels = labels.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
                Dataset::new(SparseMatrix::from_rows(cols, &rows).unwrap(), labels).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn write_then_parse_round_trips(d in dataset_strategy()) {
        let mut buf = Vec::new();
        write_libsvm(&d, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice()).unwrap().into_dataset(Some(d.num_features())).unwrap();
        prop_assert_eq!(back.labels(), d.labels());
        prop_assert_eq!(nonzeros(&back), nonzeros(&d));
    }

    #[test]
    fn maxabs_bounds_and_pattern(d in dataset_strategy()) {
        let before = nonzeros(&d);
        let scaled = scale_features(d.clone(), ScalingMode::MaxAbs).unwrap();
        let after = nonzeros(&scaled);
        prop_assert_eq!(
            before.iter().map(|t| (t.0, t.1)).collect::<Vec<_>>(),
            after.iter().map(|t| (t.0, t.1)).collect::<Vec<_>>()
        );
        let mut col_max = vec![0.0f64; d.num_features()];
        for &(_, c, v) in &after {
            prop_assert!(v.abs() <= 1.0);
            col_max[c] = col_max[c].max(v.abs());
        }
        for &(_, c, _) in &before {
            prop_assert_eq!(col_max[c], 1.0);
        }
    }
}

#[test]
fn maxabs_leaves_zero_column() {
    let rows = vec![vec![(0, 2.0)], vec![(0, -4.0)]];
    let d = Dataset::new(SparseMatrix::from_rows(2, &rows).unwrap(), vec![1.0, -1.0]).unwrap();
    let s = scale_features(d, ScalingMode::MaxAbs).unwrap();
    assert_eq!(nonzeros(&s), vec![(0, 0, 0.5), (1, 0, -1.0)]);
}

#[test]
fn fixtures_load_with_expected_shapes() {
    let wdbc = load_dataset(&fixture("wdbc.libsvm.gz"), None).unwrap();
    assert_eq!((wdbc.num_points(), wdbc.num_features()), (569, 30));
    let digits = load_dataset(&fixture("digits-lowhigh.libsvm.gz"), Some(64)).unwrap();
    assert_eq!((digits.num_points(), digits.num_features()), (1797, 64));
    assert!(digits.labels().iter().any(|&l| l > 0.0) && digits.labels().iter().any(|&l| l < 0.0));
}

#[test]
fn parse_errors_name_the_line() {
    let err = parse_libsvm("+1 1:1\n-1 2:x\n".as_bytes()).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

#[test]
#[ignore = "needs the a9a file from LIBSVM in OGL_DATA_DIR"]
fn a9a_has_published_shape() {
    let dir = std::env::var("OGL_DATA_DIR").expect("OGL_DATA_DIR is not set");
    let d = load_dataset(&Path::new(&dir).join("a9a"), Some(123)).unwrap();
    assert_eq!((d.num_points(), d.num_features()), (32561, 123));
}
