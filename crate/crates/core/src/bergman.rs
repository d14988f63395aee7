//! Minimal-norm extension problems on the disk and bidisk.
//!
//! The measure on the w-disk is e^{-kappa - R} / (|w|^2 g(log(e/|w|^2)))
//! against normalized area dA/pi. In the mass coordinate t = log(e/|w|^2)
//! its radial moments become
//!
//!   m_k = int_1^oo e^{k(1-t)} e^{-kappa(e^{1-t}) - R(e^{(1-t)/2})} / g(t) dt,
//!
//! so m_0 = 1 exactly for a unit-mass spec with kappa = R = 0; every ratio
//! this module reports is calibrated by that identity. Extension data lives
//! on w = 0: a point value on the disk, a polynomial in z on the bidisk. The
//! reported ratio divides the minimal squared extension norm by the natural
//! squared norm of the data, and certification compares it against the
//! 4(K + (1+delta)/delta C) price.
//!
//! Bidisk Gram matrices over z^p w^q use a factored quadrature: the radial
//! w-integral runs over Gauss-Legendre nodes of the mass coordinate (the
//! inverse tail absorbs the 1/g weight exactly), the z-radius over a
//! Gauss-Legendre rule on [0, 1], and the angular coupling through
//! A_m(y) = int_0^{2pi} cos(m phi) e^{-y cos phi} dphi on a trapezoid rule
//! that is spectrally exact for the coupling sizes the weight model admits.
//! Entries vanish unless p + q = p' + q' (diagonal torus invariance) and the
//! matrix is real symmetric.

use crate::certify::{Kappa, ModelDomain, RProfile, WeightModel};
use crate::constants;
use crate::denom::DenominatorSpec;
use crate::error::{Error, Result};
use crate::par;
use crate::quad;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

/// Where the body quadrature of the mass coordinate stops and the analytic
/// remainder takes over (matching the total-mass computation).
const BODY_SPLIT_T: f64 = 600.0;

/// Angular resolution of the coupling transform A_m.
const NPHI: usize = 64;

/// Baseline quadrature budget attached to reported ratios.
pub const QUAD_BASE_ERROR: f64 = 1e-6;
/// Budget when a sampled radial R profile (piecewise linear, hence with
/// curvature kinks) enters the integrand.
pub const QUAD_RADIAL_ERROR: f64 = 1e-3;

fn ensure_normalized(spec: &DenominatorSpec) -> Result<()> {
    let c = spec.c_of_g()?;
    if (c - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidSpec(format!(
            "spec must carry unit mass (C = {c}); call normalize() first"
        )));
    }
    Ok(())
}

fn quad_budget(weight: &WeightModel) -> f64 {
    match weight.r_profile {
        RProfile::Radial(_) => QUAD_RADIAL_ERROR,
        _ => QUAD_BASE_ERROR,
    }
}

// ---------------------------------------------------------------- moments

/// Radial moments m_0..m_K of the weighted measure on the w-disk.
#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub values: Vec<f64>,
}

impl MomentTable {
    pub fn m(&self, k: usize) -> f64 {
        self.values[k]
    }
}

/// Shared moment engine: kappa as a polynomial in r^2 plus the radial R.
fn radial_moments(
    spec: &DenominatorSpec,
    kappa: &[f64],
    r_profile: &RProfile,
    max_k: usize,
) -> Result<MomentTable> {
    let invg = |t: f64| match spec.eval_g(t) {
        Ok(g) if g.is_finite() && g > 0.0 => 1.0 / g,
        Ok(_) => 0.0,
        Err(_) => f64::NAN,
    };
    let mut values = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let kf = k as f64;
        let body = quad::integrate(
            |t| {
                let r2 = (1.0 - t).exp();
                let damp = (kf * (1.0 - t)).exp();
                damp * (-Kappa::poly_at(kappa, r2) - r_profile.eval(r2.sqrt())).exp() * invg(t)
            },
            1.0,
            BODY_SPLIT_T,
            1e-10,
        )?
        .value;
        // Beyond the split the radius has collapsed to 0 and the integrand
        // is e^{-kappa(0) - R(0)} / g times a superexponentially small
        // damping for k >= 1; only k = 0 keeps an analytic remainder.
        let remainder = if k == 0 {
            let c = spec.c_of_g()?;
            (-Kappa::poly_at(kappa, 0.0) - r_profile.eval(0.0)).exp()
                * (c - spec.tail_cdf(BODY_SPLIT_T)?).max(0.0)
        } else {
            0.0
        };
        values.push(body + remainder);
    }
    Ok(MomentTable { values })
}

/// Moments of a disk weight model against a unit-mass spec.
pub fn disk_moments(
    spec: &DenominatorSpec,
    weight: &WeightModel,
    max_k: usize,
) -> Result<MomentTable> {
    ensure_normalized(spec)?;
    if weight.domain != ModelDomain::Disk {
        return Err(Error::InvalidSpec("disk moments need a disk weight".into()));
    }
    let Kappa::Poly(coeffs) = &weight.kappa else {
        return Err(Error::InvalidSpec("disk weights use a radial polynomial kappa".into()));
    };
    radial_moments(spec, coeffs, &weight.r_profile, max_k)
}

// ------------------------------------------------------------------ disk

/// Minimal extension of the unit point value at w = 0 to the weighted disk.
#[derive(Debug, Clone, Serialize)]
pub struct DiskExtension {
    /// Minimal squared norm over the natural squared norm of the data.
    pub ratio: f64,
    /// Total weighted mass m_0 of the measure.
    pub total_mass: f64,
    pub quad_error: f64,
}

/// For a radial measure the minimizer is the reproducing element at 0, so
/// the minimal squared norm is the total mass and the ratio is
/// m_0 e^{(R + kappa)(0)}. A constant R must be nonpositive to stay an
/// admissible damping.
pub fn disk_min_extension(spec: &DenominatorSpec, weight: &WeightModel) -> Result<DiskExtension> {
    if let RProfile::Const(v) = weight.r_profile {
        if v > 0.0 {
            return Err(Error::InvalidSpec(format!(
                "constant R must be nonpositive, got {v}"
            )));
        }
    }
    let moments = disk_moments(spec, weight, 0)?;
    let m0 = moments.m(0);
    let ratio = m0 * (weight.r_profile.eval(0.0) + weight.kappa.at_origin()).exp();
    Ok(DiskExtension { ratio, total_mass: m0, quad_error: quad_budget(weight) })
}

// ---------------------------------------------------------------- bidisk

/// Gram matrix of the monomials z^p w^q, 0 <= p, q <= d, under the bidisk
/// weight, with its smallest eigenvalue and the attached quadrature budget.
#[derive(Debug, Clone)]
pub struct BidiskGram {
    d: usize,
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
    pub quad_error: f64,
}

impl BidiskGram {
    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        (self.d + 1) * (self.d + 1)
    }

    /// Column of the monomial z^p w^q.
    pub fn index(&self, p: usize, q: usize) -> usize {
        p * (self.d + 1) + q
    }
}

/// Split a bidisk kappa into (z-polynomial, w-polynomial, coupling).
fn split_kappa(weight: &WeightModel) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    match &weight.kappa {
        Kappa::Separable { z, w } => Ok((z.clone(), w.clone(), 0.0)),
        Kappa::QuadForm { a, b, c } => Ok((vec![0.0, *a], vec![0.0, *b], *c)),
        Kappa::Poly(_) => Err(Error::InvalidSpec(
            "bidisk weights use a separable or quadratic-form kappa".into(),
        )),
    }
}

/// z-radial moment 2 int_0^1 rho^{2p+1} e^{-kappa_z(rho^2)} drho.
fn zmom(kz: &[f64], p: usize) -> f64 {
    let (nodes, weights) = quad::gl64_unit();
    let mut acc = 0.0;
    for (rho, w) in nodes.iter().zip(weights) {
        acc += w * 2.0 * rho.powi(2 * p as i32 + 1) * (-Kappa::poly_at(kz, rho * rho)).exp();
    }
    acc
}

/// A_m(y) for m = 0..=mmax on the periodic trapezoid rule.
fn coupling_row(y: f64, mmax: usize, cos_tab: &[Vec<f64>]) -> Vec<f64> {
    let mut vals = vec![0.0; mmax + 1];
    for k in 0..NPHI {
        let e = (-y * cos_tab[1][k]).exp();
        for (m, v) in vals.iter_mut().enumerate() {
            *v += cos_tab[m][k] * e;
        }
    }
    let scale = TAU / NPHI as f64;
    for v in &mut vals {
        *v *= scale;
    }
    vals
}

fn cos_table(mmax: usize) -> Vec<Vec<f64>> {
    (0..=mmax.max(1))
        .map(|m| {
            (0..NPHI)
                .map(|k| (m as f64 * TAU * k as f64 / NPHI as f64).cos())
                .collect()
        })
        .collect()
}

/// Full tensor path: valid for any coupling (reduces to the product
/// structure at c = 0, which the fast path exploits instead).
fn gram_tensor(
    spec: &DenominatorSpec,
    kz: &[f64],
    kw: &[f64],
    coupling: f64,
    r_profile: &RProfile,
    d: usize,
) -> Result<DMatrix<f64>> {
    let (nodes_m, weights_m) = quad::gl64_unit();
    let (nodes_rho, weights_rho) = quad::gl64_unit();
    let mmax = d;
    let pmax = 2 * d;
    let cos_tab = cos_table(mmax);
    // Radial data in the mass coordinate; a saturated quantile is the far
    // tail where the radius has collapsed to 0.
    let mut rs = Vec::with_capacity(nodes_m.len());
    let mut wfac = Vec::with_capacity(nodes_m.len());
    for (mm, wm) in nodes_m.iter().zip(weights_m) {
        let t = spec.tail_quantile(*mm)?;
        let r = ((1.0 - t) / 2.0).exp();
        rs.push(r);
        wfac.push(wm * (-Kappa::poly_at(kw, r * r) - r_profile.eval(r)).exp());
    }
    // Per-t slabs Z[P][m] = sum_j w_j rho_j^{P+1} e^{-kz} A_m(c rho_j r_i).
    let slabs: Vec<Vec<Vec<f64>>> = par::map_range(rs.len(), |i| {
        let mut z = vec![vec![0.0; mmax + 1]; pmax + 1];
        for (j, rho) in nodes_rho.iter().enumerate() {
            let base = weights_rho[j] * (-Kappa::poly_at(kz, rho * rho)).exp();
            let am = coupling_row(coupling * rho * rs[i], mmax, &cos_tab);
            let mut rho_pow = *rho; // rho^{P+1} starting at P = 0
            for zp in z.iter_mut() {
                let w = base * rho_pow;
                for (m, zpm) in zp.iter_mut().enumerate() {
                    *zpm += w * am[m];
                }
                rho_pow *= rho;
            }
        }
        z
    });
    // T[Q][P][m] accumulated in fixed node order.
    let qmax = 2 * d;
    let mut t_sum = vec![vec![vec![0.0; mmax + 1]; pmax + 1]; qmax + 1];
    for (i, slab) in slabs.iter().enumerate() {
        let mut rq = 1.0; // r^Q starting at Q = 0
        for tq in t_sum.iter_mut() {
            let w = wfac[i] * rq;
            for (pp, tqp) in tq.iter_mut().enumerate() {
                for (m, tqpm) in tqp.iter_mut().enumerate() {
                    *tqpm += w * slab[pp][m];
                }
            }
            rq *= rs[i];
        }
    }
    let n = (d + 1) * (d + 1);
    let mut matrix = DMatrix::zeros(n, n);
    for p in 0..=d {
        for q in 0..=d {
            for pp in 0..=d {
                for qq in 0..=d {
                    if p + q != pp + qq {
                        continue;
                    }
                    let m = p.abs_diff(pp);
                    matrix[(p * (d + 1) + q, pp * (d + 1) + qq)] =
                        t_sum[q + qq][p + pp][m] / PI;
                }
            }
        }
    }
    Ok(matrix)
}

/// Product path for uncoupled weights: entries zmom_p(kappa_z) m_q(kappa_w, R)
/// on the diagonal, zero elsewhere.
fn gram_product(
    spec: &DenominatorSpec,
    kz: &[f64],
    kw: &[f64],
    r_profile: &RProfile,
    d: usize,
) -> Result<DMatrix<f64>> {
    let wmom = radial_moments(spec, kw, r_profile, d)?;
    let zm: Vec<f64> = (0..=d).map(|p| zmom(kz, p)).collect();
    let n = (d + 1) * (d + 1);
    let mut matrix = DMatrix::zeros(n, n);
    for p in 0..=d {
        for q in 0..=d {
            matrix[(p * (d + 1) + q, p * (d + 1) + q)] = zm[p] * wmom.m(q);
        }
    }
    Ok(matrix)
}

/// Assemble the Gram matrix and verify it stayed positive definite (loss
/// beyond 1e-10 of the largest eigenvalue is a numerical failure).
pub fn bidisk_gram(spec: &DenominatorSpec, weight: &WeightModel, d: usize) -> Result<BidiskGram> {
    ensure_normalized(spec)?;
    if weight.domain != ModelDomain::Bidisk {
        return Err(Error::InvalidSpec("bidisk gram needs a bidisk weight".into()));
    }
    let (kz, kw, coupling) = split_kappa(weight)?;
    let matrix = if coupling == 0.0 {
        gram_product(spec, &kz, &kw, &weight.r_profile, d)?
    } else {
        gram_tensor(spec, &kz, &kw, coupling, &weight.r_profile, d)?
    };
    let eigen = matrix.clone().symmetric_eigen();
    let min_eig = eigen.eigenvalues.min();
    let max_eig = eigen.eigenvalues.max();
    if min_eig < -1e-10 * max_eig.max(1e-300) {
        return Err(Error::NotPositiveDefinite(min_eig));
    }
    Ok(BidiskGram { d, matrix, min_eigenvalue: min_eig, quad_error: quad_budget(weight) })
}

/// Minimal extension of the polynomial data f(z) on w = 0 to the bidisk.
#[derive(Debug, Clone, Serialize)]
pub struct BidiskExtension {
    pub ratio: f64,
    pub min_norm: f64,
    pub nu_f: f64,
    pub degree: usize,
    pub quad_error: f64,
}

fn trimmed(f: &[f64]) -> Result<&[f64]> {
    let len = f.iter().rposition(|&c| c != 0.0).map(|i| i + 1).unwrap_or(0);
    if len == 0 {
        return Err(Error::InvalidSpec("data polynomial is zero".into()));
    }
    Ok(&f[..len])
}

/// Solve the equality-constrained minimization: stationarity of
/// c^T M c + 2 lambda^T (B c - f) gives the symmetric block system
/// [[M, B^T], [B, 0]]. B picks the coefficients of z^p w^0.
fn kkt_minimum(gram: &BidiskGram, f: &[f64]) -> Result<(DVector<f64>, f64)> {
    let n = gram.dim();
    let k = f.len();
    let size = n + k;
    let mut kkt = DMatrix::zeros(size, size);
    kkt.view_mut((0, 0), (n, n)).copy_from(&gram.matrix);
    let mut rhs = DVector::zeros(size);
    for (r, &fr) in f.iter().enumerate() {
        let col = gram.index(r, 0);
        kkt[(n + r, col)] = 1.0;
        kkt[(col, n + r)] = 1.0;
        rhs[n + r] = fr;
    }
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularConstraints("block system did not factor".into()))?;
    let coeffs = sol.rows(0, n).into_owned();
    let min_norm = coeffs.dot(&(&gram.matrix * &coeffs));
    Ok((coeffs, min_norm))
}

/// Natural squared norm of the data: (1/pi) int |f|^2 e^{-kappa(z,0) - R(0)}.
fn data_norm(weight: &WeightModel, f: &[f64]) -> Result<f64> {
    let (kz, kw, _) = split_kappa(weight)?;
    let prefactor = (-Kappa::poly_at(&kw, 0.0) - weight.r_profile.eval(0.0)).exp();
    let mut acc = 0.0;
    for (p, &fp) in f.iter().enumerate() {
        if fp != 0.0 {
            acc += fp * fp * zmom(&kz, p);
        }
    }
    Ok(prefactor * acc)
}

/// Extension ratio against a precomputed Gram matrix.
pub fn bidisk_min_extension_given(
    gram: &BidiskGram,
    weight: &WeightModel,
    f: &[f64],
) -> Result<BidiskExtension> {
    let f = trimmed(f)?;
    if f.len() - 1 > gram.degree() {
        return Err(Error::SingularConstraints(format!(
            "data degree {} exceeds extension degree {}",
            f.len() - 1,
            gram.degree()
        )));
    }
    let (_, min_norm) = kkt_minimum(gram, f)?;
    let nu_f = data_norm(weight, f)?;
    Ok(BidiskExtension {
        ratio: min_norm / nu_f,
        min_norm,
        nu_f,
        degree: gram.degree(),
        quad_error: gram.quad_error,
    })
}

pub fn bidisk_min_extension(
    spec: &DenominatorSpec,
    weight: &WeightModel,
    f: &[f64],
    d: usize,
) -> Result<BidiskExtension> {
    let gram = bidisk_gram(spec, weight, d)?;
    bidisk_min_extension_given(&gram, weight, f)
}

// ----------------------------------------------------------------- sweep

/// One sweep configuration; `data` holds the coefficients of f and is
/// ignored for disk-domain weights (the disk data is the unit point value).
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub spec: DenominatorSpec,
    pub weight: WeightModel,
    pub data: Vec<f64>,
    pub delta: f64,
}

/// Verdict for one case: the measured ratio against the certified price.
#[derive(Debug, Clone, Serialize)]
pub struct ModelVerdict {
    pub domain: String,
    pub spec: String,
    pub weight: String,
    pub f: String,
    pub delta: f64,
    pub ratio: f64,
    pub bound: f64,
    pub margin: f64,
    pub degree: usize,
    pub quad_error: f64,
    pub critical: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub verdicts: Vec<ModelVerdict>,
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SweepReport {
    pub const CSV_HEADER: &'static str =
        "domain,spec,weight,f,delta,ratio,bound,margin,degree,quad_error,flag";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for v in &self.verdicts {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                v.domain,
                csv_field(&v.spec),
                csv_field(&v.weight),
                csv_field(&v.f),
                v.delta,
                v.ratio,
                v.bound,
                v.margin,
                v.degree,
                v.quad_error,
                if v.critical { "CRITICAL" } else { "ok" }
            ));
        }
        out
    }

    pub fn criticals(&self) -> usize {
        self.verdicts.iter().filter(|v| v.critical).count()
    }
}

fn poly_label(f: &[f64]) -> String {
    let mut terms = Vec::new();
    for (p, &c) in f.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let term = match p {
            0 => format!("{c}"),
            1 if c == 1.0 => "z".to_string(),
            1 => format!("{c}z"),
            _ if c == 1.0 => format!("z^{p}"),
            _ => format!("{c}z^{p}"),
        };
        terms.push(term);
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

/// Evaluate every case and compare its ratio against the certified bound
/// plus the quadrature budget; an excess is flagged critical. Gram matrices
/// and bounds are cached across cases, and rows keep the input order so a
/// fixed configuration reproduces byte-identical reports.
pub fn sweep_verify(cases: &[SweepCase], degree: usize) -> Result<SweepReport> {
    let mut grams: HashMap<(String, String), BidiskGram> = HashMap::new();
    let mut bounds: HashMap<String, f64> = HashMap::new();
    let mut verdicts = Vec::with_capacity(cases.len());
    for case in cases {
        let spec_id = case.spec.spec_id();
        let weight_id = case.weight.weight_id();
        let bound_key = format!("{spec_id}@{}", case.delta);
        let bound = match bounds.get(&bound_key) {
            Some(&b) => b,
            None => {
                let b = constants::extension_bound(&case.spec, case.delta)?.generic_bound;
                bounds.insert(bound_key, b);
                b
            }
        };
        let (domain, f_label, ratio, deg, quad_error) = match case.weight.domain {
            ModelDomain::Disk => {
                let ext = disk_min_extension(&case.spec, &case.weight)?;
                ("disk", "1".to_string(), ext.ratio, 0, ext.quad_error)
            }
            ModelDomain::Bidisk => {
                let key = (spec_id.clone(), weight_id.clone());
                if !grams.contains_key(&key) {
                    let gram = bidisk_gram(&case.spec, &case.weight, degree)?;
                    grams.insert(key.clone(), gram);
                }
                let gram = grams.get(&key).expect("gram cached above");
                let ext = bidisk_min_extension_given(gram, &case.weight, &case.data)?;
                (
                    "bidisk",
                    poly_label(&case.data),
                    ext.ratio,
                    degree,
                    ext.quad_error,
                )
            }
        };
        let critical = ratio > bound + quad_error;
        verdicts.push(ModelVerdict {
            domain: domain.to_string(),
            spec: spec_id,
            weight: weight_id,
            f: f_label,
            delta: case.delta,
            ratio,
            bound,
            margin: bound + quad_error - ratio,
            degree: deg,
            quad_error,
            critical,
        });
    }
    Ok(SweepReport { verdicts })
}

/// Standard battery for one spec: two disk weights, three bidisk weights,
/// three data polynomials, two deltas — 22 cases.
pub fn battery_for_spec(spec: &DenominatorSpec) -> Vec<SweepCase> {
    let disk_weights = [
        WeightModel::disk(Vec::new(), RProfile::Zero),
        WeightModel::disk(vec![0.0, 1.0], RProfile::Zero),
    ];
    let bidisk_weights = [
        WeightModel::bidisk_separable(Vec::new(), Vec::new(), RProfile::Zero),
        WeightModel::bidisk_quadform(0.5, 0.5, 0.6, RProfile::Zero).expect("admissible form"),
        WeightModel::bidisk_quadform(0.7, 0.4, 0.0, RProfile::Zero).expect("admissible form"),
    ];
    let polys: [&[f64]; 3] = [&[1.0], &[0.0, 1.0], &[3.0, 0.0, 2.0]];
    let deltas = [1.0, std::f64::consts::SQRT_2];
    let mut cases = Vec::new();
    for weight in &disk_weights {
        for &delta in &deltas {
            cases.push(SweepCase {
                spec: spec.clone(),
                weight: weight.clone(),
                data: vec![1.0],
                delta,
            });
        }
    }
    for weight in &bidisk_weights {
        for poly in polys {
            for &delta in &deltas {
                cases.push(SweepCase {
                    spec: spec.clone(),
                    weight: weight.clone(),
                    data: poly.to_vec(),
                    delta,
                });
            }
        }
    }
    cases
}

/// Full verification battery: every built-in family through
/// [`battery_for_spec`] — 110 cases.
pub fn default_battery() -> Vec<SweepCase> {
    [
        DenominatorSpec::fn1(0.5).expect("valid shape"),
        DenominatorSpec::fn1(1.0).expect("valid shape"),
        DenominatorSpec::fn2(),
        DenominatorSpec::fn3(0.5).expect("valid shape"),
        DenominatorSpec::fn4(0.5, 3).expect("valid shape"),
    ]
    .iter()
    .flat_map(battery_for_spec)
    .collect()
}
