use proptest::prelude::*;
use quadnet::bounds::{build_report, verify_lemma_upper, BoundsReport, ReportOptions, Status};
use quadnet::bvp::solve_network_exact;
use quadnet::mesh::{
    derive_network, generate_grid, grid_id, parse_quadnet, ConductanceSampler, DiagonalRule, GridSpec, Network,
    Triangulation,
};
use quadnet::numeric::{int, ratio, Rational};
use quadnet::paths::{enumerate_thick_paths, Orientation, ThickRules};
use quadnet::potential::{dirichlet_energy, gradient_metric};

const GRID3: &str = include_str!("../fixtures/grid3.quadnet");
const GRID7: &str = include_str!("../fixtures/grid7.quadnet");
const EXAMPLE: &str = include_str!("../fixtures/example4.quadnet");

fn report<S: quadnet::bvp::Solve>(t: &Triangulation) -> (Network, BoundsReport<S>) {
    let net = derive_network(t).unwrap();
    let r = build_report::<S>(&net, "test", ReportOptions::default()).unwrap();
    (net, r)
}

#[test]
fn grid7_theorem_margins_match_enumeration() {
    let t = parse_quadnet(GRID7).unwrap();
    let (net, r) = report::<Rational>(&t);
    assert!(r.all_pass());
    assert_eq!(r.theorem.vertical.status, Status::Pass);
    assert_eq!(r.theorem.horizontal.status, Status::Pass);
    assert!(r.theorem.vertical.margin > 0.0 && r.theorem.horizontal.margin > 0.0);

    for (orientation, verdict) in
        [(Orientation::Vertical, &r.theorem.vertical), (Orientation::Horizontal, &r.theorem.horizontal)]
    {
        let all = enumerate_thick_paths(&r.metric, &net, orientation, ThickRules::default(), usize::MAX, 64).unwrap();
        assert!((verdict.lhs - all[0].length).abs() <= 1e-12);
    }
    let i = r.energy.clone();
    let bound = quadnet::numeric::rational_to_f64(&i) / 8f64.sqrt();
    assert!((r.theorem.vertical.rhs - bound).abs() <= 1e-15);
    assert_eq!(r.theorem.horizontal.rhs, 1.0);
}

#[test]
fn grid7_proof_chain() {
    let (_, r) = report::<Rational>(&parse_quadnet(GRID7).unwrap());
    let link = |name: &str| r.proof_chain.iter().find(|l| l.name == name).unwrap_or_else(|| panic!("{name}"));
    for l in &r.proof_chain {
        assert!(l.holds, "{l:?}");
    }
    let energy = link("energyIdentity");
    let (lhs, rhs) = energy.exact.clone().unwrap();
    assert_eq!(lhs, rhs);
    let flux = link("regionFlux");
    assert_eq!(flux.exact.clone().unwrap().0, "0");
    for name in [
        "fluxTransfer",
        "triangleInequality",
        "cauchySchwarz",
        "conductanceNormMonotonicity",
        "gradientNormMonotonicity",
        "localBound",
        "verticalConclusion",
    ] {
        link(name);
    }
}

#[test]
fn grid3_lemma_example() {
    let net = derive_network(&parse_quadnet(GRID3).unwrap()).unwrap();
    let sol = solve_network_exact(&net).unwrap();
    let energy = dirichlet_energy(&sol.values, &net).unwrap().edge_sum;
    assert_eq!(energy, int(1));
    let metric = gradient_metric(&sol, &net);
    let path: Vec<usize> =
        [(2, 1), (1, 1), (0, 1)].iter().map(|&(x, y)| net.index_of(&grid_id(x, y)).unwrap()).collect();
    let single = [net.index_of("(1,1)").unwrap()];
    let check = verify_lemma_upper(&energy, &metric, &net, &[&path, &single]);
    assert_eq!(check.pointwise.status, Status::Pass);
    assert_eq!((check.per_path[0].lhs, check.per_path[0].rhs), (1.0, 3.0));
    assert_eq!(check.per_path[1].status, Status::Pass);
    assert_eq!(check.per_path_bound, 9.0);
}

#[test]
fn grid3_report_skips_path_verdicts() {
    let (_, r) = report::<Rational>(&parse_quadnet(GRID3).unwrap());
    assert!(r.vertical.is_err() && r.horizontal.is_err());
    assert_eq!(r.theorem.vertical.status, Status::Skipped);
    assert_eq!(r.corollary.lower.status, Status::Skipped);
    assert_eq!(r.corollary.uniform_ratio.status, Status::Pass);
    assert!(r.all_pass());
}

#[test]
fn example_bounds() {
    let (net, r) = report::<Rational>(&parse_quadnet(EXAMPLE).unwrap());
    assert!(r.all_pass());
    assert_eq!(r.energy, ratio(16, 11));
    assert!((r.theorem.vertical.rhs - (16.0 / 11.0) / 8f64.sqrt()).abs() < 1e-12);
    assert!((r.theorem.vertical.rhs - 0.51426).abs() < 1e-5);
    assert_eq!(r.theorem.horizontal.rhs, 1.0);
    let product = r.product().unwrap();
    assert!((product - 3.74235).abs() < 1e-4);
    assert!(product <= (net.vertex_count() as f64).powi(2) * 16.0 / 11.0);
    assert!(r.corollary.gap_over_sqrt_k.unwrap() > 0.0);
}

#[test]
fn report_json_is_stable() {
    let t = parse_quadnet(GRID7).unwrap();
    let (net, a) = report::<Rational>(&t);
    let (_, b) = report::<Rational>(&t);
    let (ja, jb) = (a.to_json(&net, true), b.to_json(&net, true));
    assert_eq!(serde_json::to_string(&ja).unwrap(), serde_json::to_string(&jb).unwrap());
    for key in
        ["instance", "mode", "energy", "g", "m", "M", "k", "vertical", "horizontal", "bounds", "verdicts", "proofChain"]
    {
        assert!(ja.get(key).is_some(), "{key}");
    }
    for key in ["theoremVertical", "theoremHorizontal", "corollaryLower", "lemmaUpper", "product", "gapOverSqrtK"] {
        assert!(ja["bounds"].get(key).is_some(), "{key}");
    }
    assert!(ja["vertical"]["path"].is_array());
    let (net3, r3) = report::<Rational>(&parse_quadnet(GRID3).unwrap());
    assert!(r3.to_json(&net3, false)["vertical"]["absent"].is_string());
}

#[test]
fn exact_and_float_reports_agree() {
    for seed in 0..4 {
        let spec = GridSpec::new(7, 8, DiagonalRule::Alternating)
            .with_conductance(ConductanceSampler::log_uniform(seed))
            .with_random_arc_split(seed + 100);
        let t = generate_grid(&spec).unwrap();
        let (_, e) = report::<Rational>(&t);
        let (_, f) = report::<f64>(&t);
        assert_eq!(e.all_pass(), f.all_pass());
        for (a, b) in e.verdicts().iter().zip(f.verdicts()) {
            assert_eq!(a.status, b.status, "{}", a.name);
            if a.lhs.is_finite() {
                assert!((a.lhs - b.lhs).abs() <= 1e-9 * (1.0 + a.lhs.abs()));
                assert!((a.rhs - b.rhs).abs() <= 1e-9 * (1.0 + a.rhs.abs()));
            }
        }
    }
}

fn scaled(t: &Triangulation, lambda: &Rational) -> Triangulation {
    let mut s = t.clone();
    s.scale_conductances(lambda);
    s
}

#[test]
fn conductance_scaling() {
    let t = parse_quadnet(GRID7).unwrap();
    let lambda = ratio(9, 4);
    let (_, a) = report::<Rational>(&t);
    let (_, b) = report::<Rational>(&scaled(&t, &lambda));
    let root = 1.5;
    assert!((b.theorem.vertical.lhs - root * a.theorem.vertical.lhs).abs() < 1e-12);
    assert!((b.theorem.vertical.rhs - root * a.theorem.vertical.rhs).abs() < 1e-12);
    assert_eq!(b.theorem.vertical.status, a.theorem.vertical.status);
    assert!((b.product().unwrap() - 2.25 * a.product().unwrap()).abs() < 1e-12);
    assert!((b.corollary.lower.rhs - 2.25 * a.corollary.lower.rhs).abs() < 1e-12);
    let (ga, gb) = (a.corollary.gap_over_sqrt_k.unwrap(), b.corollary.gap_over_sqrt_k.unwrap());
    assert!((ga - gb).abs() < 1e-12 && ga > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_8x8_chains_hold(rule in 0usize..3, seed in any::<u64>(), split in any::<u64>()) {
        let spec = GridSpec::new(8, 8, DiagonalRule::ALL[rule])
            .with_conductance(ConductanceSampler::log_uniform(seed))
            .with_random_arc_split(split);
        let (_, r) = report::<f64>(&generate_grid(&spec).unwrap());
        for l in &r.proof_chain {
            prop_assert!(l.holds, "{:?}", l);
        }
        prop_assert!(r.all_pass());
    }
}
