//! End-to-end runs through the public API, starting from workspace text.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use oiforge::dio::{cloud_export, dio_search, gap_stats, verify_report, SearchSpec};
use oiforge::genpoly::{compile_sigma, identity_scan, identity_to_ring, identity_verify, render_identity};
use oiforge::padic::{wilkie_adjoin_free, wilkie_extend, PadicAssignment};
use oiforge::ringlab::{discreteness_scan, DEFAULT_CAP};
use oiforge::{PrecisionCtx, WorkspaceSpec};

const SQRT2_SEQUENCE: &str = "
[field]
sqrt = 2
[symbols]
r1 = 0.30103
r2 = 1/3
[sequence]
g0 = t
g1 = sqrt(2)*t - r1
g2 = 2*sqrt(2)*r1*t - r2
";

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn extend_twice_then_scan() {
    let ws = WorkspaceSpec::parse("[generators]\nt0 = t\n").unwrap();
    let ring = ws.ring().unwrap();
    let pad = PadicAssignment::seeded(&ring, &[2, 3], 10).unwrap();
    let s = ws.element("t^2").unwrap();
    let first = wilkie_extend(&ring, &s, &ws.element_poly("t^2").unwrap(), 36, &pad, "g1").unwrap();
    assert_eq!(first.m, BigInt::from(25));
    assert_eq!(first.generator.render(), "1/36*(t^2-25)");

    // adjoin (g1 - m')/2 on top; the images of g1 carry the new data
    let ring1 = first.ring;
    let pad1 = ring1.padic().unwrap().clone();
    let g1 = ring1.gens()[1].clone();
    let h = oiforge::IntPoly::int_var(2, 1);
    let second = wilkie_extend(&ring1, &g1, &h, 2, &pad1, "g2").unwrap();
    let m2 = &second.m;
    assert!(m2 == &BigInt::from(0) || m2 == &BigInt::from(1));
    assert_eq!(pad1.get(2).unwrap().images[1].clone() % 2, m2.clone());
    let ring2 = second.ring;
    assert_eq!(ring2.len(), 3);
    assert_eq!(ring2.padic().unwrap().precision(2), Some(7));
    assert_eq!(ring2.padic().unwrap().precision(3), Some(8));

    // the ring stays discrete in low degree: every t-free relation has an integer value
    let v = discreteness_scan(&ring2, 2, DEFAULT_CAP).unwrap();
    assert!(!v.is_violation(), "{:?}", v.witness.map(|w| ring2.render_poly(&w)));
    assert!(v.relations.iter().all(|r| r.integer));
}

#[test]
fn free_adjunction_keeps_assignment_shape() {
    let ws = WorkspaceSpec::parse("[symbols]\nr1 = 1/3\n[generators]\nt0 = t\n[padic]\nprimes = 2, 5\nprecision = 6\n")
        .unwrap();
    let ring = ws.ring().unwrap();
    let g = ws.element("t - r1").unwrap();
    let mut choices = BTreeMap::new();
    choices.insert(5, BigInt::from(7));
    let ext = wilkie_adjoin_free(&ring, &g, "f", &choices).unwrap();
    let pad = ext.padic().unwrap();
    assert_eq!(pad.get(5).unwrap().images[1], BigInt::from(7));
    assert_eq!(pad.get(2).unwrap().images[1], BigInt::from(0));
    // the same symbol is no longer fresh
    assert!(wilkie_adjoin_free(&ext, &ws.element("t^2 - r1").unwrap(), "f2", &BTreeMap::new()).is_err());
}

#[test]
fn identity_bridge_and_violation() {
    let ctx = PrecisionCtx::default();
    let ws = WorkspaceSpec::parse(SQRT2_SEQUENCE).unwrap();
    let seq = ws.sequence().unwrap();
    let sys = compile_sigma(&seq);
    let ids = identity_scan(&sys, 2, 50, 20, DEFAULT_CAP, &ctx).unwrap();
    let rendered: Vec<String> = ids.iter().map(render_identity).collect();
    assert_eq!(rendered, ["u1^2-u2"]);
    assert_eq!(identity_verify(&sys, &ids[0], 300, &ctx).unwrap(), None);

    let bridge = identity_to_ring(&ids[0], &seq).unwrap();
    let w = bridge.witness.clone().unwrap();
    assert_eq!(bridge.ring.render_poly(&w), "2*g0^2-g1^2-g2");
    assert_eq!(bridge.constant.render(), "r2-r1^2");
    let verdict = discreteness_scan(&bridge.ring, bridge.suggested_degree, DEFAULT_CAP).unwrap();
    assert!(verdict.is_violation());
}

#[test]
fn search_gaps_and_cloud_agree() {
    let ctx = PrecisionCtx::default();
    let ws = WorkspaceSpec::parse(SQRT2_SEQUENCE).unwrap();
    let sys = compile_sigma(&ws.sequence().unwrap());
    let spec = SearchSpec::new(&sys, q(1, 20), 2000);
    let report = dio_search(&spec, &ctx).unwrap();
    assert!(report.undecided.is_empty());
    assert!(verify_report(&spec, &report, &ctx).unwrap());
    let stats = gap_stats(&report);
    assert_eq!(stats.count, report.solutions.len());
    assert_eq!(stats.density, q(stats.count as i64, 2000));

    // every solution shows up in a stride-1 cloud with the same chain
    let mut buf = Vec::new();
    let n = cloud_export(&sys, 1, 2000, 1, 12, &mut buf, &ctx).unwrap();
    assert_eq!(n, 2000);
    let lines: Vec<serde_json::Value> =
        String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    for s in &report.solutions {
        let y = s.point.y0.to_string().parse::<usize>().unwrap();
        let rec = &lines[y - 1];
        assert_eq!(rec["y0"], y.to_string());
        let chain: Vec<String> = s.point.ychain.iter().map(|c| c.to_string()).collect();
        assert_eq!(rec["ychain"], serde_json::json!(chain));
    }
}
