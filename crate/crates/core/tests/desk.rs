use pmlf::characters::enumerate_dual;
use pmlf::desk::{d4_desk, DESK_RECON_EPS};
use pmlf::lvalues::table::LambdaTable;

fn golden(name: &str) -> LambdaTable {
    let path = format!("{}/data/d4/{name}.lambda", env!("CARGO_MANIFEST_DIR"));
    LambdaTable::from_text(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn twisted_levels_period_ratios_and_golden_prefix() {
    let desk = d4_desk(6000).unwrap();
    let dual = enumerate_dual(&desk.group);
    let levels: Vec<i64> = dual.iter().map(|e| desk.twist_form(e).unwrap().form.level).collect();
    assert_eq!(levels, vec![32, 256, 64, 256]);
    assert_eq!(desk.frob_p, vec![0]);
    for (eta, k) in dual.iter().zip([0, 3, 2, 1]) {
        let b = desk.component(eta, 2, 1e-15).unwrap();
        assert_eq!(b.component.period_ratio, k, "eta {eta}");
        assert!(b.backend_gap < 1e-8);
        let g = golden(&b.component.table.form_id);
        let mut fresh = b.component.table.clone();
        fresh.n_max = 2;
        assert_eq!(fresh.entries, g.restricted(2).entries);
        assert_eq!(fresh.normalization, g.normalization);
    }
    assert!(DESK_RECON_EPS < 1e-8);
}

#[test]
fn trivial_component_is_the_curve() {
    let t0 = golden("32a-eta0");
    let base = LambdaTable::from_text(&std::fs::read_to_string(format!("{}/data/d4/32a.lambda", env!("CARGO_MANIFEST_DIR"))).unwrap()).unwrap();
    assert_eq!(t0.entries, base.entries);
}
