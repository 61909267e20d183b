//! Property tests for dataset I/O and splitting.

use proptest::prelude::*;

use ordfreq::data::{
    load_dataset, split_train_test, write_dataset, ColumnCategory, ColumnDef, ColumnKind, Dataset,
    FeatureSchema, OrdinalLabel,
};

fn finite_f64() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |v| v.is_finite())
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..5, 1usize..30).prop_flat_map(|(p, n)| {
        let rows = proptest::collection::vec(proptest::collection::vec(finite_f64(), p), n);
        let labels = proptest::collection::vec(0i64..6, n);
        (rows, labels).prop_map(move |(rows, labels)| {
            let columns = (0..p)
                .map(|j| {
                    ColumnDef::new(format!("col_{j}"), ColumnKind::Continuous, ColumnCategory::Trip)
                })
                .collect();
            let schema = FeatureSchema::new(columns).unwrap();
            let labels = labels.into_iter().map(|l| OrdinalLabel::new(l).unwrap()).collect();
            Dataset::new(schema, rows, labels).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_bitwise_exact(data in dataset_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_dataset(&data, &path).unwrap();
        let back = load_dataset(&path, data.schema()).unwrap();
        prop_assert_eq!(back, data);
    }

    #[test]
    fn split_partitions_every_row(
        data in dataset_strategy().prop_filter("n >= 2", |d| d.n_rows() >= 2),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let n = data.n_rows();
        let (train, test) = split_train_test(&data, fraction, seed).unwrap();
        prop_assert_eq!(train.n_rows() + test.n_rows(), n);
        let expected_train = (n as f64 * fraction + 0.5).floor() as usize;
        prop_assert_eq!(train.n_rows(), expected_train);

        // disjoint cover: tag rows by full contents
        let key = |d: &Dataset, i: usize| {
            let mut k = format!("{}", d.labels()[i].value());
            for v in d.row(i) {
                k.push_str(&format!(",{}", v.to_bits()));
            }
            k
        };
        let mut seen: Vec<String> = (0..train.n_rows()).map(|i| key(&train, i))
            .chain((0..test.n_rows()).map(|i| key(&test, i)))
            .collect();
        seen.sort();
        let mut want: Vec<String> = (0..n).map(|i| key(&data, i)).collect();
        want.sort();
        prop_assert_eq!(seen, want);
    }
}
