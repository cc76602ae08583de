//! Evaluation of the length lower bounds, the product sandwich and the
//! step-by-step flux argument behind the vertical bound.
//!
//! Exact mode decides every inequality with zero slack: rational quantities
//! are compared directly (squared where roots would appear) and sums of
//! square roots are bracketed by verified rational enclosures. Float mode
//! uses the slack `1e-9 * max(1, I)`.

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bvp::{BvpError, HarmonicSolution, Solve};
use crate::mesh::{ArcId, Network, VertexSet};
use crate::numeric::{sqrt_enclosure, Rational, Scalar};
use crate::paths::{enclosed_region, shortest_thick_path, Orientation, PathError, Region, ThickPath, ThickRules};
use crate::potential::{
    conductance_vector, dirichlet_energy, gradient_metric, network_constants, normal_derivative,
    normal_vector_derivative, GradientMetric, NetworkConstants, PotentialError, Side,
};

/// Relative float slack for all bound comparisons.
pub const FLOAT_SLACK: f64 = 1e-9;

/// Solver tolerance used by the report pipeline in float mode.
pub const SOLVER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Solve(#[from] BvpError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One checked inequality or identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: &'static str,
    pub status: Status,
    pub lhs: f64,
    pub relation: &'static str,
    pub rhs: f64,
    /// `rhs - lhs` for `<=`, `lhs - rhs` for `>=`, `|lhs - rhs|` for `=`.
    pub margin: f64,
}

impl Verdict {
    fn new(name: &'static str, ok: bool, lhs: f64, relation: &'static str, rhs: f64) -> Self {
        let margin = match relation {
            "<=" => rhs - lhs,
            ">=" => lhs - rhs,
            _ => (lhs - rhs).abs(),
        };
        Verdict { name, status: Status::from_bool(ok), lhs, relation, rhs, margin }
    }

    fn skipped(name: &'static str, relation: &'static str) -> Self {
        Verdict { name, status: Status::Skipped, lhs: f64::NAN, relation, rhs: f64::NAN, margin: f64::NAN }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    fn to_json(&self) -> Value {
        let num = |x: f64| if x.is_finite() { Value::from(x) } else { Value::Null };
        json!({
            "status": self.status,
            "lhs": num(self.lhs),
            "relation": self.relation,
            "rhs": num(self.rhs),
            "margin": num(self.margin),
        })
    }
}

/// One link of a proof chain, with the vertex that broke it if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub name: &'static str,
    pub holds: bool,
    pub lhs: f64,
    pub relation: &'static str,
    pub rhs: f64,
    /// Exact values of both sides when available.
    pub exact: Option<(String, String)>,
    pub offending: Option<String>,
    pub note: Option<String>,
    /// Per-vertex values (vertex id, lhs, rhs).
    pub terms: Vec<(String, f64, f64)>,
}

impl ChainLink {
    fn new(name: &'static str, holds: bool, lhs: f64, relation: &'static str, rhs: f64) -> Self {
        ChainLink { name, holds, lhs, relation, rhs, exact: None, offending: None, note: None, terms: Vec::new() }
    }

    fn failed(name: &'static str, note: String) -> Self {
        let mut link = ChainLink::new(name, false, f64::NAN, "=", f64::NAN);
        link.note = Some(note);
        link
    }

    pub fn to_json(&self, detailed: bool) -> Value {
        let num = |x: f64| if x.is_finite() { Value::from(x) } else { Value::Null };
        let mut m = Map::new();
        m.insert("link".into(), self.name.into());
        m.insert("holds".into(), self.holds.into());
        m.insert("lhs".into(), num(self.lhs));
        m.insert("relation".into(), self.relation.into());
        m.insert("rhs".into(), num(self.rhs));
        if let Some((l, r)) = &self.exact {
            m.insert("exact".into(), json!({ "lhs": l, "rhs": r }));
        }
        if let Some(v) = &self.offending {
            m.insert("offending".into(), v.clone().into());
        }
        if let Some(n) = &self.note {
            m.insert("note".into(), n.clone().into());
        }
        if detailed && !self.terms.is_empty() {
            let terms: Vec<Value> =
                self.terms.iter().map(|(v, l, r)| json!({ "vertex": v, "lhs": num(*l), "rhs": num(*r) })).collect();
            m.insert("terms".into(), terms.into());
        }
        Value::Object(m)
    }
}

/// Comparison policy derived from the scalar mode and the energy scale.
#[derive(Debug, Clone, Copy)]
struct Cmp {
    exact: bool,
    eps: f64,
}

impl Cmp {
    fn new<S: Scalar>(energy: &S) -> Self {
        Cmp { exact: S::is_exact(), eps: FLOAT_SLACK * energy.to_f64().max(1.0) }
    }

    fn le<S: Scalar>(&self, a: &S, b: &S) -> bool {
        if self.exact {
            a <= b
        } else {
            a.to_f64() <= b.to_f64() + self.eps
        }
    }

    fn eq<S: Scalar>(&self, a: &S, b: &S) -> bool {
        if self.exact {
            a == b
        } else {
            (a.to_f64() - b.to_f64()).abs() <= self.eps
        }
    }

    /// `sqrt(a) <= sqrt(b)` for non-negative squares.
    fn le_sq<S: Scalar>(&self, a_sq: &S, b_sq: &S) -> bool {
        if self.exact {
            a_sq <= b_sq
        } else {
            a_sq.sqrt_f64() <= b_sq.sqrt_f64() + self.eps
        }
    }
}

/// Rational bounds on a sum of square roots, `None` in float mode.
fn sum_sqrt_enclosure<S: Scalar>(squares: &[S]) -> Option<(Rational, Rational)> {
    let mut lo = Rational::from_integer(0.into());
    let mut hi = lo.clone();
    for s in squares {
        let (l, h) = sqrt_enclosure(s.as_rational()?);
        lo += l;
        hi += h;
    }
    Some((lo, hi))
}

fn exact_pair<S: Scalar>(a: &S, b: &S) -> Option<(String, String)> {
    S::is_exact().then(|| (a.render(), b.render()))
}

/// Outcome of checking both length lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremCheck {
    pub vertical: Verdict,
    pub horizontal: Verdict,
}

/// `length(vertical) >= I / (g M)` and `length(horizontal) >= g m`.
pub fn verify_theorem<S: Scalar>(
    energy: &S,
    g: &S,
    constants: &NetworkConstants<S>,
    vertical: Option<&ThickPath<S>>,
    horizontal: Option<&ThickPath<S>>,
) -> TheoremCheck {
    let cmp = Cmp::new(energy);
    let g_f = g.to_f64();
    let vertical = match vertical {
        None => Verdict::skipped("theoremVertical", ">="),
        Some(path) => {
            let bound = energy.to_f64() / (g_f * constants.big_m());
            let ok = match sum_sqrt_enclosure(&path.length_squared_terms) {
                // lo(length)^2 g^2 M^2 >= I^2
                Some((lo, _)) => {
                    let lhs = S::from_rational(&(&lo * &lo))
                        * g.clone()
                        * g.clone()
                        * constants.max_conductance_norm_sq.clone();
                    lhs >= energy.clone() * energy.clone()
                }
                None => path.length >= bound - cmp.eps,
            };
            Verdict::new("theoremVertical", ok, path.length, ">=", bound)
        }
    };
    let horizontal = match horizontal {
        None => Verdict::skipped("theoremHorizontal", ">="),
        Some(path) => {
            let bound = g_f * constants.m();
            let ok = match sum_sqrt_enclosure(&path.length_squared_terms) {
                Some((lo, _)) => {
                    S::from_rational(&(&lo * &lo)) >= g.clone() * g.clone() * constants.min_conductance.clone()
                }
                None => path.length >= bound - cmp.eps,
            };
            Verdict::new("theoremHorizontal", ok, path.length, ">=", bound)
        }
    };
    TheoremCheck { vertical, horizontal }
}

/// Pointwise and per-path upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    /// `max rho^2 <= I`.
    pub pointwise: Verdict,
    /// `length(path) <= |path| sqrt(I) <= |V| sqrt(I)`, one per path.
    pub per_path: Vec<Verdict>,
    /// `|V| sqrt(I)`.
    pub per_path_bound: f64,
}

pub fn verify_lemma_upper<S: Scalar>(
    energy: &S,
    metric: &GradientMetric<S>,
    network: &Network,
    paths: &[&[usize]],
) -> LemmaCheck {
    let cmp = Cmp::new(energy);
    let n = network.vertex_count();
    let mut worst = 0;
    let mut ok = true;
    for v in 0..n {
        if metric.rho_sq[v] > metric.rho_sq[worst] {
            worst = v;
        }
        ok &= cmp.le(&metric.rho_sq[v], energy);
    }
    let sqrt_i = energy.sqrt_f64();
    let pointwise = Verdict::new("lemmaPointwise", ok, metric.rho[worst], "<=", sqrt_i);

    let per_path = paths
        .iter()
        .map(|path| {
            let squares: Vec<S> = path.iter().map(|&v| metric.rho_sq[v].clone()).collect();
            let length: f64 = path.iter().map(|&v| metric.rho[v]).sum();
            let count = S::from_usize(path.len());
            let ok = path.len() <= n
                && match sum_sqrt_enclosure(&squares) {
                    // hi(length)^2 <= |path|^2 I
                    Some((_, hi)) => S::from_rational(&(&hi * &hi)) <= count.clone() * count * energy.clone(),
                    None => length <= path.len() as f64 * sqrt_i + cmp.eps,
                };
            Verdict::new("lemmaPerPath", ok, length, "<=", path.len() as f64 * sqrt_i)
        })
        .collect();
    LemmaCheck { pointwise, per_path, per_path_bound: n as f64 * sqrt_i }
}

/// Product sandwich and the uniform-conductance constant identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryCheck {
    /// `product >= (m / M) I`.
    pub lower: Verdict,
    /// `|V|^2 I >= product`.
    pub upper: Verdict,
    /// `(I/(gM)) (g m) = (m/M) I`.
    pub identity: Verdict,
    /// `m / M = 1 / sqrt(k)`, only for uniform conductance.
    pub uniform_ratio: Verdict,
    /// `product / I - 1/sqrt(k)`, only for uniform conductance.
    pub gap_over_sqrt_k: Option<f64>,
}

pub fn verify_corollary<S: Scalar>(
    energy: &S,
    g: &S,
    constants: &NetworkConstants<S>,
    network: &Network,
    vertical: Option<&ThickPath<S>>,
    horizontal: Option<&ThickPath<S>>,
) -> CorollaryCheck {
    let cmp = Cmp::new(energy);
    let i_f = energy.to_f64();
    let n = S::from_usize(network.vertex_count());
    let ratio_sq = constants.ratio_sq();
    let lower_bound = ratio_sq.sqrt_f64() * i_f;
    let upper_bound = (network.vertex_count() as f64).powi(2) * i_f;

    // Squared-bound identity: (I^2 / (g^2 M^2)) (g^2 m^2) = (m^2 / M^2) I^2.
    let g2 = g.clone() * g.clone();
    let i2 = energy.clone() * energy.clone();
    let lhs = (i2.clone() / (g2.clone() * constants.max_conductance_norm_sq.clone()))
        * (g2 * constants.min_conductance.clone());
    let rhs = ratio_sq.clone() * i2;
    let identity = Verdict::new("corollaryIdentity", cmp.eq(&lhs, &rhs), lhs.sqrt_f64(), "=", rhs.sqrt_f64());

    let uniform = network.has_uniform_conductance();
    let k = S::from_usize(constants.max_degree);
    let uniform_ratio = if uniform {
        // m^2 k = M^2
        let lhs = constants.min_conductance.clone() * k;
        Verdict::new(
            "uniformRatio",
            cmp.eq(&lhs, &constants.max_conductance_norm_sq),
            ratio_sq.sqrt_f64(),
            "=",
            1.0 / (constants.max_degree as f64).sqrt(),
        )
    } else {
        Verdict::skipped("uniformRatio", "=")
    };

    let (lower, upper, gap) = match (vertical, horizontal) {
        (Some(v), Some(h)) => {
            let product = v.length * h.length;
            let enclosures =
                sum_sqrt_enclosure(&v.length_squared_terms).zip(sum_sqrt_enclosure(&h.length_squared_terms));
            let (lower_ok, upper_ok) = match enclosures {
                Some(((vlo, vhi), (hlo, hhi))) => {
                    let lo = &vlo * &hlo;
                    let hi = &vhi * &hhi;
                    let lower_ok = S::from_rational(&(&lo * &lo)) >= ratio_sq.clone() * energy.clone() * energy.clone();
                    let upper_ok = S::from_rational(&hi) <= n.clone() * n * energy.clone();
                    (lower_ok, upper_ok)
                }
                None => (product >= lower_bound - cmp.eps, product <= upper_bound + cmp.eps),
            };
            let gap = uniform.then(|| product / i_f - 1.0 / (constants.max_degree as f64).sqrt());
            (
                Verdict::new("corollaryLower", lower_ok, product, ">=", lower_bound),
                Verdict::new("corollaryUpper", upper_ok, product, "<=", upper_bound),
                gap,
            )
        }
        _ => (Verdict::skipped("corollaryLower", ">="), Verdict::skipped("corollaryUpper", "<="), None),
    };
    CorollaryCheck { lower, upper, identity, uniform_ratio, gap_over_sqrt_k: gap }
}

/// Every link of the flux argument bounding `I / g` by `M` times the length
/// of a vertical thick path, evaluated on the region that path cuts off.
pub fn verify_proof_chain_vertical<S: Scalar>(
    solution: &HarmonicSolution<S>,
    metric: &GradientMetric<S>,
    constants: &NetworkConstants<S>,
    network: &Network,
    energy: &S,
    region: &Region,
) -> Vec<ChainLink> {
    let cmp = Cmp::new(energy);
    let u = &solution.values;
    let g = &solution.g;
    let v_set: &VertexSet = &region.interior;
    let on_path = VertexSet::from_indices(network.vertex_count(), region.cut_path.iter().copied());
    let mut links = Vec::new();

    // I = g |sum over P4 of dF|
    let p4_flux_f =
        network.arc(ArcId::P4).iter().fold(S::zero(), |acc, &x| acc + normal_derivative(u, network, x, None));
    let rhs = g.clone() * p4_flux_f.abs_val();
    let mut link = ChainLink::new("energyIdentity", cmp.eq(energy, &rhs), energy.to_f64(), "=", rhs.to_f64());
    link.exact = exact_pair(energy, &rhs);
    links.push(link);

    // sum over the region's vertex boundary of dV = 0
    let mut flux = S::zero();
    let mut terms = Vec::new();
    for x in region.boundary.iter() {
        let d = normal_derivative(u, network, x, Some(v_set));
        terms.push((network.id(x).to_string(), d.to_f64(), 0.0));
        flux = flux + d;
    }
    let zero = S::zero();
    let mut link = ChainLink::new("regionFlux", cmp.eq(&flux, &zero), flux.to_f64(), "=", 0.0);
    link.exact = exact_pair(&flux, &zero);
    link.terms = terms;
    links.push(link);

    // dV = dF off the path (so the side arcs carry no flux and P4 is unchanged)
    let mut link = ChainLink::new("boundaryAgreement", true, 0.0, "=", 0.0);
    for x in region.boundary.iter().filter(|&x| !on_path.contains(x)) {
        let dv = normal_derivative(u, network, x, Some(v_set));
        let df = normal_derivative(u, network, x, None);
        link.terms.push((network.id(x).to_string(), dv.to_f64(), df.to_f64()));
        let diff = (dv - df).abs_val();
        if diff.to_f64() > link.lhs {
            link.lhs = diff.to_f64();
        }
        if !cmp.eq(&diff, &zero) && link.holds {
            link.holds = false;
            link.offending = Some(network.id(x).to_string());
        }
    }
    links.push(link);

    // |sum over P4 of dV| = |sum over the path of dV|
    let p4_flux_v = network
        .arc(ArcId::P4)
        .iter()
        .filter(|&&x| region.boundary.contains(x))
        .fold(S::zero(), |acc, &x| acc + normal_derivative(u, network, x, Some(v_set)));
    let path_dv: Vec<S> = region.cut_path.iter().map(|&x| normal_derivative(u, network, x, Some(v_set))).collect();
    let path_flux = path_dv.iter().fold(S::zero(), |acc, d| acc + d.clone());
    let (a, b) = (p4_flux_v.abs_val(), path_flux.abs_val());
    let mut link = ChainLink::new("fluxTransfer", cmp.eq(&a, &b), a.to_f64(), "=", b.to_f64());
    link.exact = exact_pair(&a, &b);
    links.push(link);

    // |sum dV| <= sum |dV|
    let abs_sum = path_dv.iter().fold(S::zero(), |acc, d| acc + d.abs_val());
    let mut link = ChainLink::new("triangleInequality", cmp.le(&b, &abs_sum), b.to_f64(), "<=", abs_sum.to_f64());
    link.exact = exact_pair(&b, &abs_sum);
    links.push(link);

    // Per-vertex links along the path.
    let n = region.cut_path.len();
    let mut cauchy = ChainLink::new("cauchySchwarz", true, 0.0, "<=", 0.0);
    let mut cond_mono = ChainLink::new("conductanceNormMonotonicity", true, 0.0, "<=", 0.0);
    let mut grad_mono = ChainLink::new("gradientNormMonotonicity", true, 0.0, "<=", 0.0);
    let mut local = ChainLink::new("localBound", true, 0.0, "<=", 0.0);
    let mut product_sum = 0.0;
    for (i, (&x, dv)) in region.cut_path.iter().zip(&path_dv).enumerate() {
        let id = network.id(x).to_string();
        let flag = |link: &mut ChainLink, ok: bool| {
            if !ok && link.holds {
                link.holds = false;
                link.offending = Some(id.clone());
            }
        };
        let cv = match conductance_vector::<S>(network, x, Side::Region(v_set)) {
            Ok(cv) => cv,
            Err(e) => {
                links.push(ChainLink::failed("regionNeighborhood", format!("{e}")));
                return links;
            }
        };
        let dvec = normal_vector_derivative(u, network, x, Some(v_set)).expect("path vertex lies outside the region");
        let cv_sq = cv.weighted_norm_sq();
        let dvec_sq = dvec.weighted_norm_sq();
        let lhs = dv.clone() * dv.clone();
        let rhs = cv_sq.clone() * dvec_sq.clone();
        cauchy.terms.push((id.clone(), dv.abs_val().to_f64(), rhs.sqrt_f64()));
        flag(&mut cauchy, cmp.le_sq(&lhs, &rhs));
        product_sum += rhs.sqrt_f64();

        let endpoint = i == 0 || i + 1 == n;
        let side = if endpoint { Side::Boundary } else { Side::Interior };
        let full_sq =
            conductance_vector::<S>(network, x, side).map(|c| c.weighted_norm_sq()).unwrap_or_else(|_| S::zero());
        cond_mono.terms.push((id.clone(), cv_sq.sqrt_f64(), full_sq.sqrt_f64()));
        flag(&mut cond_mono, cmp.le_sq(&cv_sq, &full_sq) && cmp.le_sq(&full_sq, &constants.max_conductance_norm_sq));

        grad_mono.terms.push((id.clone(), dvec_sq.sqrt_f64(), metric.rho[x]));
        flag(&mut grad_mono, cmp.le_sq(&dvec_sq, &metric.rho_sq[x]));

        let bound = constants.max_conductance_norm_sq.clone() * metric.rho_sq[x].clone();
        local.terms.push((id.clone(), rhs.sqrt_f64(), bound.sqrt_f64()));
        flag(&mut local, cmp.le_sq(&rhs, &bound));
    }
    cauchy.lhs = abs_sum.to_f64();
    cauchy.rhs = product_sum;
    local.lhs = product_sum;
    let length: f64 = region.cut_path.iter().map(|&x| metric.rho[x]).sum();
    local.rhs = constants.big_m() * length;
    for link in [&mut cond_mono, &mut grad_mono] {
        link.lhs = link.terms.iter().map(|t| t.1).fold(0.0, f64::max);
        link.rhs = constants.big_m().max(link.terms.iter().map(|t| t.2).fold(0.0, f64::max));
    }
    links.extend([cauchy, cond_mono, grad_mono, local]);

    // I / g <= M length, from the links above.
    let i_over_g = energy.to_f64() / g.to_f64();
    let holds = links.iter().all(|l| l.holds);
    links.push(ChainLink::new("verticalConclusion", holds, i_over_g, "<=", constants.big_m() * length));
    links
}

/// Telescoping links for a horizontal thick path: each vertex's metric
/// dominates the step to the next vertex, and the steps add up to `g`.
pub fn verify_proof_chain_horizontal<S: Scalar>(
    solution: &HarmonicSolution<S>,
    metric: &GradientMetric<S>,
    constants: &NetworkConstants<S>,
    network: &Network,
    energy: &S,
    path: &ThickPath<S>,
) -> Vec<ChainLink> {
    let cmp = Cmp::new(energy);
    let u = &solution.values;
    let mut step = ChainLink::new("horizontalStep", true, 0.0, "<=", 0.0);
    let mut total = S::zero();
    let mut weighted = 0.0;
    for pair in path.vertices.windows(2) {
        let (x, y) = (pair[0], pair[1]);
        let diff = (u[y].clone() - u[x].clone()).abs_val();
        total = total + diff.clone();
        let c: S = network.edge_between(x, y).map(|e| e.conductance()).unwrap_or_else(S::zero);
        let lhs = c.clone() * diff.clone() * diff;
        weighted += lhs.sqrt_f64();
        step.terms.push((network.id(x).to_string(), lhs.sqrt_f64(), metric.rho[x]));
        if !cmp.le_sq(&lhs, &metric.rho_sq[x]) && step.holds {
            step.holds = false;
            step.offending = Some(network.id(x).to_string());
        }
    }
    step.lhs = weighted;
    step.rhs = path.length;
    let g = &solution.g;
    let mut telescope = ChainLink::new("horizontalTelescope", cmp.le(g, &total), g.to_f64(), "<=", total.to_f64());
    telescope.exact = exact_pair(g, &total);
    let conclusion = ChainLink::new(
        "horizontalConclusion",
        step.holds && telescope.holds,
        g.to_f64() * constants.m(),
        "<=",
        path.length,
    );
    vec![step, telescope, conclusion]
}

/// Options for [`build_report`].
#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub rules: ThickRules,
    /// Float solver tolerance; ignored in exact mode.
    pub tolerance: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { rules: ThickRules::default(), tolerance: SOLVER_TOLERANCE }
    }
}

/// Everything computed for one instance.
#[derive(Debug, Clone)]
pub struct BoundsReport<S> {
    pub instance: String,
    pub solution: HarmonicSolution<S>,
    pub metric: GradientMetric<S>,
    pub constants: NetworkConstants<S>,
    pub energy: S,
    pub vertex_count: usize,
    pub vertical: Result<ThickPath<S>, PathError>,
    pub horizontal: Result<ThickPath<S>, PathError>,
    pub theorem: TheoremCheck,
    pub lemma: LemmaCheck,
    pub corollary: CorollaryCheck,
    pub proof_chain: Vec<ChainLink>,
}

impl<S: Scalar> BoundsReport<S> {
    pub fn verdicts(&self) -> Vec<&Verdict> {
        let mut out = vec![&self.theorem.vertical, &self.theorem.horizontal, &self.lemma.pointwise];
        out.extend(&self.lemma.per_path);
        out.extend([
            &self.corollary.lower,
            &self.corollary.upper,
            &self.corollary.identity,
            &self.corollary.uniform_ratio,
        ]);
        out
    }

    /// All verdicts and chain links hold.
    pub fn all_pass(&self) -> bool {
        self.verdicts().iter().all(|v| v.passed()) && self.proof_chain.iter().all(|l| l.holds)
    }

    pub fn product(&self) -> Option<f64> {
        Some(self.vertical.as_ref().ok()?.length * self.horizontal.as_ref().ok()?.length)
    }

    pub fn to_json(&self, network: &Network, detailed_chain: bool) -> Value {
        let path_json = |p: &Result<ThickPath<S>, PathError>| match p {
            Ok(path) => json!({ "path": path.ids(network), "length": path.length }),
            Err(e) => json!({ "absent": e.to_string() }),
        };
        let mut verdicts = Map::new();
        verdicts.insert("theoremVertical".into(), self.theorem.vertical.to_json());
        verdicts.insert("theoremHorizontal".into(), self.theorem.horizontal.to_json());
        verdicts.insert("lemmaPointwise".into(), self.lemma.pointwise.to_json());
        verdicts
            .insert("lemmaPerPath".into(), Value::Array(self.lemma.per_path.iter().map(Verdict::to_json).collect()));
        verdicts.insert("corollaryLower".into(), self.corollary.lower.to_json());
        verdicts.insert("corollaryUpper".into(), self.corollary.upper.to_json());
        verdicts.insert("corollaryIdentity".into(), self.corollary.identity.to_json());
        verdicts.insert("uniformRatio".into(), self.corollary.uniform_ratio.to_json());
        verdicts.insert("proofChain".into(), Value::from(self.proof_chain.iter().all(|l| l.holds)));
        verdicts.insert("all".into(), Value::from(self.all_pass()));

        let i = self.energy.to_f64();
        let g = self.solution.g.to_f64();
        json!({
            "instance": self.instance,
            "mode": S::MODE,
            "energy": self.energy.to_json(),
            "g": self.solution.g.to_json(),
            "m": self.constants.m(),
            "M": self.constants.big_m(),
            "k": self.constants.max_degree,
            "mSquared": self.constants.min_conductance.to_json(),
            "MSquared": self.constants.max_conductance_norm_sq.to_json(),
            "vertical": path_json(&self.vertical),
            "horizontal": path_json(&self.horizontal),
            "bounds": {
                "theoremVertical": i / (g * self.constants.big_m()),
                "theoremHorizontal": g * self.constants.m(),
                "corollaryLower": self.constants.ratio_sq().sqrt_f64() * i,
                "lemmaUpper": (self.vertex_count as f64).powi(2) * i,
                "perPathUpper": self.lemma.per_path_bound,
                "product": self.product(),
                "gapOverSqrtK": self.corollary.gap_over_sqrt_k,
            },
            "verdicts": verdicts,
            "proofChain": self.proof_chain.iter().map(|l| l.to_json(detailed_chain)).collect::<Vec<_>>(),
        })
    }
}

/// Solve, measure, search both thick paths and check every bound.
pub fn build_report<S: Solve>(
    network: &Network,
    instance: &str,
    options: ReportOptions,
) -> Result<BoundsReport<S>, BoundsError> {
    let solution = S::solve(network, options.tolerance)?;
    let energy = dirichlet_energy(&solution.values, network)?.value().clone();
    let metric = gradient_metric(&solution, network);
    let constants = network_constants::<S>(network);

    let search = |o: Orientation| match shortest_thick_path(&metric, network, o, options.rules) {
        Ok(p) => Ok(Ok(p)),
        Err(e @ PathError::NoThickPath(_)) => Ok(Err(e)),
        Err(e) => Err(e),
    };
    let vertical = search(Orientation::Vertical)?;
    let horizontal = search(Orientation::Horizontal)?;

    let g = solution.g.clone();
    let theorem = verify_theorem(&energy, &g, &constants, vertical.as_ref().ok(), horizontal.as_ref().ok());
    let found: Vec<&[usize]> =
        [&vertical, &horizontal].into_iter().filter_map(|p| p.as_ref().ok().map(|p| p.vertices.as_slice())).collect();
    let lemma = verify_lemma_upper(&energy, &metric, network, &found);
    let corollary =
        verify_corollary(&energy, &g, &constants, network, vertical.as_ref().ok(), horizontal.as_ref().ok());

    let mut proof_chain = Vec::new();
    if let Ok(path) = &vertical {
        match enclosed_region(network, path) {
            Ok(region) => proof_chain
                .extend(verify_proof_chain_vertical(&solution, &metric, &constants, network, &energy, &region)),
            Err(e) => proof_chain.push(ChainLink::failed("region", e.to_string())),
        }
    }
    if let Ok(path) = &horizontal {
        proof_chain.extend(verify_proof_chain_horizontal(&solution, &metric, &constants, network, &energy, path));
    }

    Ok(BoundsReport {
        instance: instance.to_string(),
        solution,
        metric,
        constants,
        energy,
        vertex_count: network.vertex_count(),
        vertical,
        horizontal,
        theorem,
        lemma,
        corollary,
        proof_chain,
    })
}
