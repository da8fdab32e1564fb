//! Fixture loading for the benchmarks.

use std::path::PathBuf;

use andrews_core::dataset::load_csv;
use andrews_core::{ColumnRef, Dataset, LabelSpec};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Loads one of the bundled datasets by id.
pub fn fixture(id: &str) -> Dataset {
    let label = match id {
        "iris" => LabelSpec::Column(ColumnRef::Name("species".into())),
        "breast-cancer" => LabelSpec::Column(ColumnRef::Name("diagnosis".into())),
        "diabetes" => LabelSpec::Quartile(ColumnRef::Name("target".into())),
        other => panic!("unknown fixture {other}"),
    };
    load_csv(data_dir().join(format!("{id}.csv")), &label, true).expect("fixture loads")
}
