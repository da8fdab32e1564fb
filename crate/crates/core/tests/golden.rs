mod common;

use std::fs;

use andrews_core::render::{self, StyleOptions};
use andrews_core::{AndrewsBasis, PcaModel};

/// Regenerate with `UPDATE_GOLDEN=1 cargo test -p andrews-core --test golden`.
fn check_golden(name: &str, bytes: &[u8]) {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, bytes).unwrap();
        return;
    }
    let expected = fs::read(&path).unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert!(expected == bytes, "{name} differs from the golden copy");
}

#[test]
fn iris_classic_svg() {
    let ds = common::iris();
    let model = PcaModel::fit(&ds, true).unwrap();
    let basis = AndrewsBasis::classic(ds.dim()).unwrap();
    let cs = render::sample(&basis, &model, &ds, 16).unwrap();
    let bands = render::envelopes(&cs);
    let style = StyleOptions { title: Some("iris".into()), ..StyleOptions::default() };
    check_golden("iris_classic.svg", &render::emit_svg(&cs, Some(&bands), &style));
}

#[test]
fn iris_classic_csv() {
    let ds = common::iris();
    let model = PcaModel::fit(&ds, true).unwrap();
    let basis = AndrewsBasis::classic(ds.dim()).unwrap();
    let cs = render::sample(&basis, &model, &ds, 5).unwrap();
    check_golden("iris_classic.csv", &render::emit_csv(&cs));
}
