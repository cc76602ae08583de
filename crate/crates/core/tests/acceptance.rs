//! Acceptance suite: one PASS/FAIL line per criterion. Every quantity the
//! library reports is re-derived here from the raw triangulation where that
//! is possible, so a shared bug cannot make both sides agree.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use quadnet::bounds::{build_report, BoundsReport, ReportOptions, Status};
use quadnet::bvp::{solve_network_exact, solve_network_float};
use quadnet::mesh::{
    derive_network, generate_grid, parse_quadnet, ArcId, ConductanceSampler, DiagonalRule, GridSpec, Network,
    Triangulation,
};
use quadnet::numeric::{int, ratio, rational_to_f64, Rational};
use quadnet::paths::{
    enclosed_region, enumerate_thick_paths, shortest_thick_path, HorizontalVariant, Orientation, PathError, ThickRules,
};
use quadnet::potential::{dirichlet_energy, gradient_metric};
use rayon::prelude::*;

const EXAMPLE: &str = include_str!("../fixtures/example4.quadnet");
const GRID3: &str = include_str!("../fixtures/grid3.quadnet");

const SLACK: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail }
    } else {
        let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
        Outcome { pass: false, detail: format!("{detail}; {} failure(s): {}", failures.len(), shown.join(" | ")) }
    }
}

// ---------------------------------------------------------------------------
// Independent oracles over the raw triangulation.

struct Oracle {
    n: usize,
    interior: Vec<bool>,
    /// Neighbors with conductance, over all triangulation edges.
    adj: Vec<Vec<(usize, Rational)>>,
    arcs: [Vec<usize>; 4],
    g: Rational,
}

impl Oracle {
    fn new(t: &Triangulation) -> Self {
        let n = t.vertex_count();
        let boundary = t.boundary_vertices();
        let interior = (0..n).map(|v| !boundary.contains(&v)).collect();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in t.edges() {
            let c = t.conductance(a, b).clone();
            adj[a].push((b, c.clone()));
            adj[b].push((a, c));
        }
        Oracle { n, interior, adj, arcs: t.arcs.clone(), g: t.g.clone() }
    }

    /// Network neighbors: all neighbors of an interior vertex, interior
    /// neighbors of a boundary vertex.
    fn net_neighbors(&self, x: usize) -> impl Iterator<Item = &(usize, Rational)> {
        let all = self.interior[x];
        self.adj[x].iter().filter(move |(y, _)| all || self.interior[*y])
    }

    fn energy(&self, u: &[Rational]) -> Rational {
        let mut e = Rational::zero();
        for x in 0..self.n {
            for (y, c) in &self.adj[x] {
                if x < *y && (self.interior[x] || self.interior[*y]) {
                    let d = &u[x] - &u[*y];
                    e += c * &d * &d;
                }
            }
        }
        e
    }

    fn rho_sq(&self, u: &[Rational], x: usize) -> Rational {
        self.net_neighbors(x).map(|(y, c)| c * (&u[x] - &u[*y]) * (&u[x] - &u[*y])).sum()
    }

    /// (m^2, M^2, k)
    fn constants(&self) -> (Rational, Rational, usize) {
        let mut m2: Option<Rational> = None;
        let mut big = Rational::zero();
        let mut k = 0;
        for x in 0..self.n {
            let mut norm = Rational::zero();
            let mut deg = 0;
            for (_, c) in self.net_neighbors(x) {
                if m2.as_ref().is_none_or(|m| c < m) {
                    m2 = Some(c.clone());
                }
                norm += c;
                deg += 1;
            }
            big = big.max(norm);
            k = k.max(deg);
        }
        (m2.unwrap(), big, k)
    }

    /// Flux out of `set` at a vertex outside it.
    fn flux(&self, u: &[Rational], x: usize, set: &BTreeSet<usize>) -> Rational {
        self.adj[x].iter().filter(|(y, _)| set.contains(y)).map(|(y, c)| c * (&u[x] - &u[*y])).sum()
    }

    fn interior_set(&self) -> BTreeSet<usize> {
        (0..self.n).filter(|&v| self.interior[v]).collect()
    }

    /// Exact residual of the boundary value problem.
    fn residual(&self, u: &[Rational]) -> Rational {
        let arc_of = |v: usize| (0..4).find(|&a| self.arcs[a].contains(&v));
        let mut worst = Rational::zero();
        for x in 0..self.n {
            let r = match arc_of(x) {
                Some(1) => u[x].clone(),
                Some(3) => &u[x] - &self.g,
                _ => self.net_neighbors(x).map(|(y, c)| c * (&u[x] - &u[*y])).sum(),
            };
            worst = worst.max(r.abs());
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Instance family.

struct Instance {
    name: String,
    t: Triangulation,
    uniform: bool,
}

fn instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for rows in 5..=9 {
        for cols in 5..=9 {
            for (r, rule) in DiagonalRule::ALL.into_iter().enumerate() {
                let base = GridSpec::new(rows, cols, rule);
                out.push(Instance {
                    name: format!("grid{rows}x{cols}-{rule:?}-unit"),
                    t: generate_grid(&base).unwrap(),
                    uniform: true,
                });
                for s in 0..6u64 {
                    let seed = ((rows * 10 + cols) * 10 + r) as u64 * 100 + s;
                    let spec = base
                        .clone()
                        .with_conductance(ConductanceSampler::log_uniform(seed))
                        .with_random_arc_split(seed ^ 0x5eed);
                    out.push(Instance {
                        name: format!("grid{rows}x{cols}-{rule:?}-seed{seed}"),
                        t: generate_grid(&spec).unwrap(),
                        uniform: false,
                    });
                }
            }
        }
    }
    out
}

struct Evaluated {
    instance: Instance,
    network: Network,
    exact: BoundsReport<Rational>,
    float: BoundsReport<f64>,
}

fn evaluate(instance: Instance) -> Evaluated {
    let network = derive_network(&instance.t).unwrap();
    let exact = build_report::<Rational>(&network, &instance.name, ReportOptions::default()).unwrap();
    let float = build_report::<f64>(&network, &instance.name, ReportOptions::default()).unwrap();
    Evaluated { instance, network, exact, float }
}

fn path_length_oracle(oracle: &Oracle, u: &[Rational], path: &[usize]) -> f64 {
    path.iter().map(|&x| rational_to_f64(&oracle.rho_sq(u, x)).sqrt()).sum()
}

// ---------------------------------------------------------------------------
// Criteria.

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let t = parse_quadnet(EXAMPLE).unwrap();
    let net = derive_network(&t).unwrap();
    let sol = solve_network_exact(&net).unwrap();
    let published = [
        ("X", ratio(1, 2)),
        ("V", ratio(1, 2)),
        ("S", ratio(31, 44)),
        ("T", ratio(13, 44)),
        ("Y", ratio(13, 44)),
        ("L", ratio(31, 44)),
        ("U", ratio(1, 2)),
        ("C1", ratio(3, 11)),
        ("C2", ratio(1, 2)),
        ("C3", ratio(8, 11)),
        ("C4", ratio(1, 2)),
    ];
    for (name, value) in &published {
        let got = &sol.values[net.index_of(name).unwrap()];
        if got != value {
            failures.push(format!("f({name}) = {got}, expected {value}"));
        }
    }
    let oracle = Oracle::new(&t);
    let energy = dirichlet_energy(&sol.values, &net).unwrap().edge_sum;
    if energy != ratio(16, 11) || oracle.energy(&sol.values) != energy {
        failures.push(format!("I = {energy}"));
    }
    let metric = gradient_metric(&sol, &net);
    let rules = ThickRules::default();
    let h = shortest_thick_path(&metric, &net, Orientation::Horizontal, rules).unwrap();
    let v = shortest_thick_path(&metric, &net, Orientation::Vertical, rules).unwrap();
    let lh = path_length_oracle(&oracle, &sol.values, &h.vertices);
    let lv = path_length_oracle(&oracle, &sol.values, &v.vertices);
    if (h.length - 2.23111).abs() > 1e-4 || (lh - h.length).abs() > 1e-12 {
        failures.push(format!("l_h = {}", h.length));
    }
    if (v.length - 1.67733).abs() > 1e-4 || (lv - v.length).abs() > 1e-12 {
        failures.push(format!("l_v = {}", v.length));
    }
    if h.ids(&net) != ["0", "C1", "X", "C3", "1"] || v.ids(&net) != ["V", "C2", "X", "C4", "U"] {
        failures.push(format!("paths {:?} {:?}", h.ids(&net), v.ids(&net)));
    }
    let (_, _, k) = oracle.constants();
    if k != 8 || net.max_degree() != 8 {
        failures.push(format!("k = {k}"));
    }
    let gap = lh * lv / (16.0 / 11.0) - 1.0 / 8f64.sqrt();
    if (gap - 2.21929).abs() > 1e-4 {
        failures.push(format!("gap = {gap}"));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    outcome(
        &failures,
        format!(
            "values exact, I = {energy}, l_h = {:.6}, l_v = {:.6}, k = {k}, gap = {gap:.6}, {elapsed:.2?}",
            h.length, v.length
        ),
    )
}

fn criterion_2(all: &[Evaluated], elapsed: Duration) -> Outcome {
    let failures: Vec<String> = all
        .par_iter()
        .flat_map_iter(|e| {
            let mut f = Vec::new();
            let oracle = Oracle::new(&e.instance.t);
            let u = &e.exact.solution.values;
            let i = oracle.energy(u);
            let (m2, big2, _) = oracle.constants();
            if i != e.exact.energy
                || m2 != e.exact.constants.min_conductance
                || big2 != e.exact.constants.max_conductance_norm_sq
            {
                f.push(format!("{}: constants disagree with oracle", e.instance.name));
            }
            let i_f = rational_to_f64(&i);
            let g = rational_to_f64(&oracle.g);
            let eps = SLACK * i_f.max(1.0);
            let (m, big) = (rational_to_f64(&m2).sqrt(), rational_to_f64(&big2).sqrt());
            for (verdict_e, verdict_f, path, lower) in [
                (&e.exact.theorem.vertical, &e.float.theorem.vertical, &e.exact.vertical, i_f / (g * big)),
                (&e.exact.theorem.horizontal, &e.float.theorem.horizontal, &e.exact.horizontal, g * m),
            ] {
                let Ok(path) = path else {
                    if verdict_e.status != Status::Skipped {
                        f.push(format!("{}: verdict without path", e.instance.name));
                    }
                    continue;
                };
                let length = path_length_oracle(&oracle, u, &path.vertices);
                if length.is_nan() || length < lower - eps {
                    f.push(format!("{}: oracle {length} < {lower}", e.instance.name));
                }
                if verdict_e.status != Status::Pass || verdict_f.status != Status::Pass {
                    f.push(format!(
                        "{}: {} exact {:?} float {:?}",
                        e.instance.name, verdict_e.name, verdict_e.status, verdict_f.status
                    ));
                }
            }
            f
        })
        .collect();
    let vertical = all.iter().filter(|e| e.exact.vertical.is_ok()).count();
    let horizontal = all.iter().filter(|e| e.exact.horizontal.is_ok()).count();
    let mut failures = failures;
    if all.len() < 500 {
        failures.push(format!("only {} instances", all.len()));
    }
    if elapsed >= Duration::from_secs(60) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    outcome(
        &failures,
        format!(
            "{} instances, vertical thick paths on {vertical}, horizontal on {horizontal}, exact + float, {elapsed:.2?}",
            all.len()
        ),
    )
}

fn criterion_3(all: &[Evaluated]) -> Outcome {
    let mut failures = Vec::new();
    let mut both = 0;
    let mut uniform = 0;
    for e in all {
        let oracle = Oracle::new(&e.instance.t);
        let (m2, big2, k) = oracle.constants();
        if e.instance.uniform {
            uniform += 1;
            // m/M = 1/sqrt(k) exactly: m^2 k = M^2.
            if &m2 * int(k as i64) != big2 || e.exact.corollary.uniform_ratio.status != Status::Pass {
                failures.push(format!("{}: m^2 k = {} vs M^2 = {big2}", e.instance.name, &m2 * int(k as i64)));
            }
        }
        let (Ok(v), Ok(h)) = (&e.exact.vertical, &e.exact.horizontal) else { continue };
        both += 1;
        let u = &e.exact.solution.values;
        let i = rational_to_f64(&oracle.energy(u));
        let product = path_length_oracle(&oracle, u, &v.vertices) * path_length_oracle(&oracle, u, &h.vertices);
        let lower = (rational_to_f64(&m2) / rational_to_f64(&big2)).sqrt() * i;
        let upper = (oracle.n as f64).powi(2) * i;
        let eps = SLACK * i.max(1.0);
        if !(product >= lower - eps && product <= upper + eps) {
            failures.push(format!("{}: {lower} <= {product} <= {upper} fails", e.instance.name));
        }
        for r in [&e.exact.corollary, &e.float.corollary] {
            for verdict in [&r.lower, &r.upper, &r.identity] {
                if verdict.status != Status::Pass {
                    failures.push(format!("{}: {} {:?}", e.instance.name, verdict.name, verdict.status));
                }
            }
        }
    }
    outcome(&failures, format!("{both} instances with both paths, {uniform} unit-conductance instances"))
}

fn criterion_4(all: &[Evaluated]) -> Outcome {
    let required = [
        "energyIdentity",
        "regionFlux",
        "fluxTransfer",
        "triangleInequality",
        "cauchySchwarz",
        "conductanceNormMonotonicity",
        "gradientNormMonotonicity",
        "localBound",
        "verticalConclusion",
    ];
    let results: Vec<(bool, Vec<String>)> = all
        .par_iter()
        .map(|e| {
            let mut f = Vec::new();
            let Ok(path) = &e.exact.vertical else { return (false, f) };
            for (mode, chain) in [("exact", &e.exact.proof_chain), ("float", &e.float.proof_chain)] {
                for name in required {
                    match chain.iter().find(|l| l.name == name) {
                        Some(l) if l.holds => {}
                        Some(l) => f.push(format!("{} {mode}: {name} broken at {:?}", e.instance.name, l.offending)),
                        None => f.push(format!("{} {mode}: {name} missing", e.instance.name)),
                    }
                }
            }
            // Exact zeros, recomputed independently.
            let oracle = Oracle::new(&e.instance.t);
            let u = &e.exact.solution.values;
            let region = enclosed_region(&e.network, path).unwrap();
            let v: BTreeSet<usize> = region.interior.iter().collect();
            let boundary: BTreeSet<usize> =
                v.iter().flat_map(|&x| oracle.adj[x].iter().map(|(y, _)| *y)).filter(|y| !v.contains(y)).collect();
            let flux: Rational = boundary.iter().map(|&x| oracle.flux(u, x, &v)).sum();
            if !flux.is_zero() {
                f.push(format!("{}: region flux {flux}", e.instance.name));
            }
            let f_set = oracle.interior_set();
            let p4: Rational = oracle.arcs[3].iter().map(|&x| oracle.flux(u, x, &f_set)).sum();
            if oracle.energy(u) != &oracle.g * p4.abs() {
                f.push(format!("{}: energy identity", e.instance.name));
            }
            let exact_chain =
                |name: &str| e.exact.proof_chain.iter().find(|l| l.name == name).and_then(|l| l.exact.clone());
            if exact_chain("regionFlux").map(|(l, _)| l) != Some("0".into()) {
                f.push(format!("{}: library region flux not exactly zero", e.instance.name));
            }
            if exact_chain("energyIdentity").is_none_or(|(l, r)| l != r) {
                f.push(format!("{}: library energy identity not exact", e.instance.name));
            }
            (true, f)
        })
        .collect();
    let checked = results.iter().filter(|r| r.0).count();
    let failures: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
    outcome(&failures, format!("{checked} vertical thick paths, all links in both modes"))
}

fn criterion_5(all: &[Evaluated]) -> Outcome {
    let small: Vec<&Evaluated> = all.iter().filter(|e| e.network.vertex_count() <= 30).collect();
    let variants = [HorizontalVariant::Verbatim, HorizontalVariant::DeltaF];
    let results: Vec<Vec<String>> = small
        .par_iter()
        .map(|e| {
            let mut f = Vec::new();
            for variant in variants {
                let rules = ThickRules { horizontal_variant: variant };
                for orientation in Orientation::BOTH {
                    let metric = &e.exact.metric;
                    let all = enumerate_thick_paths(metric, &e.network, orientation, rules, usize::MAX, 30).unwrap();
                    match shortest_thick_path(metric, &e.network, orientation, rules) {
                        Ok(best) if !all.is_empty() => {
                            if (best.length - all[0].length).abs() > 1e-12 * (1.0 + best.length) {
                                f.push(format!(
                                    "{} {orientation}: {} vs {}",
                                    e.instance.name, best.length, all[0].length
                                ));
                            }
                            if !all.iter().any(|p| p.vertices == best.vertices) {
                                f.push(format!("{} {orientation}: search result not enumerated", e.instance.name));
                            }
                        }
                        Err(PathError::NoThickPath(_)) if all.is_empty() => {}
                        other => f.push(format!(
                            "{} {orientation}: feasibility mismatch ({:?}, {} enumerated)",
                            e.instance.name,
                            other.map(|p| p.length),
                            all.len()
                        )),
                    }
                }
            }
            f
        })
        .collect();
    let failures: Vec<String> = results.into_iter().flatten().collect();
    let feasible = small.iter().filter(|e| e.exact.vertical.is_ok() || e.exact.horizontal.is_ok()).count();
    outcome(
        &failures,
        format!(
            "{} instances with |V| <= 30 ({feasible} with a thick path), both orientations, both separation variants",
            small.len()
        ),
    )
}

fn criterion_6(all: &[Evaluated]) -> Outcome {
    let failures: Vec<String> = all
        .par_iter()
        .flat_map_iter(|e| {
            let mut f = Vec::new();
            let name = &e.instance.name;
            let oracle = Oracle::new(&e.instance.t);
            let exact = &e.exact.solution;
            if !exact.residual.is_zero() || !oracle.residual(&exact.values).is_zero() {
                f.push(format!("{name}: exact residual {}", exact.residual));
            }
            let float = solve_network_float(&e.network, quadnet::bounds::SOLVER_TOLERANCE).unwrap();
            if float.residual.is_nan() || float.residual > 1e-10 {
                f.push(format!("{name}: float residual {}", float.residual));
            }
            let g = rational_to_f64(&oracle.g);
            if !exact.values.iter().all(|x| !x.is_negative() && x <= &oracle.g)
                || !float.values.iter().all(|&x| (-1e-12..=g + 1e-12).contains(&x))
            {
                f.push(format!("{name}: maximum principle"));
            }
            let f_set = oracle.interior_set();
            let boundary: BTreeSet<usize> = (0..oracle.n).filter(|&v| !oracle.interior[v]).collect();
            let global: Rational = boundary.iter().map(|&x| oracle.flux(&exact.values, x, &f_set)).sum();
            if !global.is_zero() {
                f.push(format!("{name}: global flux {global}"));
            }
            let float_flux: f64 = boundary
                .iter()
                .map(|&x| {
                    oracle.adj[x]
                        .iter()
                        .filter(|(y, _)| f_set.contains(y))
                        .map(|(y, c)| rational_to_f64(c) * (float.values[x] - float.values[*y]))
                        .sum::<f64>()
                })
                .sum();
            if float_flux.abs() > 1e-9 {
                f.push(format!("{name}: float global flux {float_flux}"));
            }
            match dirichlet_energy(&exact.values, &e.network) {
                Ok(b)
                    if b.edge_sum == b.potential_sum
                        && b.edge_sum == b.directed_sum
                        && b.edge_sum == oracle.energy(&exact.values) => {}
                other => f.push(format!("{name}: energy forms {other:?}")),
            }
            f
        })
        .collect();
    outcome(&failures, format!("{} instances: residual, maximum principle, global flux, energy forms", all.len()))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let t = parse_quadnet(GRID3).unwrap();
    let net = derive_network(&t).unwrap();
    let sol = solve_network_exact(&net).unwrap();
    let at = |id: &str| net.index_of(id).unwrap();
    // Hand oracle: 6u = a + b + 2, a = u, b = u.
    let u = ratio(1, 2);
    let mut hand: BTreeMap<&str, Rational> = BTreeMap::new();
    for id in ["(0,0)", "(1,0)", "(2,0)"] {
        hand.insert(id, int(0));
    }
    for id in ["(0,2)", "(1,2)", "(2,2)"] {
        hand.insert(id, int(1));
    }
    for id in ["(1,1)", "(0,1)", "(2,1)"] {
        hand.insert(id, u.clone());
    }
    for (id, value) in &hand {
        if &sol.values[at(id)] != value {
            failures.push(format!("f{id} = {}", sol.values[at(id)]));
        }
    }
    let energy = dirichlet_energy(&sol.values, &net).unwrap().edge_sum;
    if energy != int(1) {
        failures.push(format!("I = {energy}"));
    }
    let metric = gradient_metric(&sol, &net);
    if metric.rho_sq[at("(1,1)")] != int(1) {
        failures.push("rho(1,1)".into());
    }
    for id in ["(1,0)", "(0,0)", "(1,2)", "(2,2)"] {
        if metric.rho_sq[at(id)] != ratio(1, 4) {
            failures.push(format!("rho{id}"));
        }
    }
    let r = build_report::<Rational>(&net, "grid3", ReportOptions::default()).unwrap();
    if r.constants.min_conductance != int(1) || r.constants.max_conductance_norm_sq != int(6) {
        failures.push("m, M".into());
    }
    if shortest_thick_path(&metric, &net, Orientation::Vertical, ThickRules::default())
        != Err(PathError::NoThickPath(Orientation::Vertical))
    {
        failures.push("vertical search should report NoThickPath".into());
    }
    let p4_sum: Rational =
        net.arc(ArcId::P4).iter().map(|&x| quadnet::potential::normal_derivative(&sol.values, &net, x, None)).sum();
    if p4_sum != int(1) {
        failures.push(format!("P4 flux {p4_sum}"));
    }
    outcome(
        &failures,
        "f(1,1) = 1/2, I = 1, rho(1,1) = 1, boundary rho = 1/2, m = 1, M = sqrt 6, no vertical thick path".into(),
    )
}

fn main() -> ExitCode {
    let mut lines = Vec::new();
    lines.push((1, "worked example reproduction", criterion_1()));

    let start = Instant::now();
    let all: Vec<Evaluated> = instances().into_par_iter().map(evaluate).collect();
    let elapsed = start.elapsed();
    lines.push((2, "length lower bounds", criterion_2(&all, elapsed)));
    lines.push((3, "product sandwich", criterion_3(&all)));
    lines.push((4, "vertical proof chain", criterion_4(&all)));
    lines.push((5, "search vs enumeration", criterion_5(&all)));
    lines.push((6, "solver certification", criterion_6(&all)));
    lines.push((7, "GRID3 micro-oracle", criterion_7()));

    let mut ok = true;
    for (n, name, o) in &lines {
        ok &= o.pass;
        println!("criterion {n} [PRIMARY] {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
