//! Ready-made oracles with known constants, and the two closure rules
//! (pointwise maximum and positive scaling) that preserve strong quasiconvexity.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::domain::{intersect_boxes, DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::oracle::FunctionOracle;
use crate::point::Point;
use crate::sampling::Sampler;
use crate::scalar::Scalar;

/// Below this norm the gradient of `√‖x‖` is treated as undefined.
pub const SQRT_NORM_SINGULAR_RADIUS: f64 = 1e-12;
/// `|h₁ - h₂|` below which a pointwise maximum is considered tied.
pub const MAX_TIE_TOL: f64 = 1e-12;
/// Points drawn from `K` when checking the sign premises of a quadratic fraction.
const PREMISE_SAMPLES: usize = 2000;
const PREMISE_SEED: u64 = 0x5eed_f00d;

/// A named oracle plus the constants that are known for it.
#[derive(Clone, Debug)]
pub struct CatalogEntry<S: Scalar> {
    pub name: String,
    pub oracle: FunctionOracle<S>,
    pub provenance: String,
    /// Known constants by name (`gamma`, `L`, `r`, `mu`, ...).
    pub constants: BTreeMap<String, S>,
    /// Non-fatal issues, e.g. a premise that could not be verified.
    pub warnings: Vec<String>,
}

/// JSON-friendly summary of an entry.
#[derive(Debug, Clone, Serialize)]
pub struct EntryMetadata<S: Scalar> {
    pub name: String,
    pub dim: usize,
    pub constants: BTreeMap<String, S>,
    pub provenance: String,
    pub domain: DomainSpec<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimizer: Option<Point<S>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<S: Scalar> CatalogEntry<S> {
    fn new(name: impl Into<String>, oracle: FunctionOracle<S>, provenance: impl Into<String>) -> Self {
        let mut constants = BTreeMap::new();
        if let Some(g) = oracle.known_modulus {
            constants.insert("gamma".to_owned(), g);
        }
        if let Some(l) = oracle.known_lipschitz {
            constants.insert("L".to_owned(), l);
        }
        Self { name: name.into(), oracle, provenance: provenance.into(), constants, warnings: Vec::new() }
    }

    fn with_constant(mut self, name: &str, value: S) -> Self {
        self.constants.insert(name.to_owned(), value);
        self
    }

    pub fn gamma(&self) -> Option<S> {
        self.oracle.known_modulus
    }

    pub fn lipschitz(&self) -> Option<S> {
        self.oracle.known_lipschitz
    }

    pub fn metadata(&self) -> EntryMetadata<S> {
        EntryMetadata {
            name: self.name.clone(),
            dim: self.oracle.dim(),
            constants: self.constants.clone(),
            provenance: self.provenance.clone(),
            domain: self.oracle.domain.clone(),
            minimizer: self.oracle.known_minimizer().cloned(),
            warnings: self.warnings.clone(),
        }
    }
}

fn positive<S: Scalar>(name: &str, v: S) -> Result<()> {
    if v > S::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

/// `h(x) = √‖x‖` on the ball `B(0, r)`, strongly quasiconvex there with
/// modulus `γ = 1 / (5^{1/4} 2^{5/4} r^{1/2})` although not convex.
///
/// The gradient `x / (2‖x‖^{3/2})` is undefined at the origin; the oracle
/// returns `DomainViolation` for `‖x‖ < 1e-12` and samplers skip that ball.
pub fn sqrt_norm<S: Scalar>(dim: usize, radius: S) -> Result<CatalogEntry<S>> {
    positive("radius", radius)?;
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let singular = S::lit(SQRT_NORM_SINGULAR_RADIUS);
    let gamma = S::one() / (S::lit(5.0).powf(S::lit(0.25)) * S::lit(2.0).powf(S::lit(1.25)) * radius.sqrt());
    let oracle = FunctionOracle::new(
        dim,
        |x: &Point<S>| Ok(x.norm().sqrt()),
        move |x: &Point<S>| {
            let n = x.norm();
            if n < singular {
                return Err(Error::DomainViolation(format!("gradient of sqrt-norm undefined at {x}")));
            }
            Ok(x.scale(S::one() / (S::lit(2.0) * n * n.sqrt())))
        },
    )?
    .with_domain(DomainSpec::from_kind(DomainKind::ball(Point::zeros(dim), radius)?))
    .with_nonsmooth(move |x: &Point<S>| x.norm() < singular)
    .with_modulus(gamma)?
    .with_minimizer(Point::zeros(dim))?;
    Ok(CatalogEntry::new(
        format!("sqrt_norm(dim={dim},r={radius})"),
        oracle,
        "square root of the Euclidean norm: nonconvex, strongly quasiconvex on every ball B(0, r)",
    )
    .with_constant("r", radius))
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix must be square and non-empty".into()));
        }
        Ok(Self { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![S::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, x: &Point<S>) -> Point<S> {
        Point::raw(
            (0..self.n)
                .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == S::zero())
    }

    fn is_symmetric(&self) -> bool {
        let scale = self.data.iter().fold(S::one(), |m, v| m.max(v.abs()));
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= S::lit(1e-12) * scale))
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).as_f64())
    }

    /// Sorted eigenvalues of a symmetric matrix.
    fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_nalgebra().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Parameters of `h = f / g` with `f(x) = ½⟨Ax,x⟩ + ⟨a,x⟩ + α`,
/// `g(x) = ½⟨Bx,x⟩ + ⟨b,x⟩ + β`, on `K = {m ≤ g ≤ M}`.
#[derive(Debug, Clone)]
pub struct QuadraticFraction<S: Scalar> {
    pub num_matrix: Matrix<S>,
    pub num_linear: Point<S>,
    pub num_offset: S,
    pub den_matrix: Matrix<S>,
    pub den_linear: Point<S>,
    pub den_offset: S,
    pub lower: S,
    pub upper: S,
}

impl<S: Scalar> QuadraticFraction<S> {
    fn numerator(&self, x: &Point<S>) -> S {
        S::lit(0.5) * self.num_matrix.mul_vec(x).dot(x) + self.num_linear.dot(x) + self.num_offset
    }

    fn denominator(&self, x: &Point<S>) -> S {
        S::lit(0.5) * self.den_matrix.mul_vec(x).dot(x) + self.den_linear.dot(x) + self.den_offset
    }

    fn gradient(&self, x: &Point<S>) -> Result<Point<S>> {
        let f = self.numerator(x);
        let g = self.denominator(x);
        if g == S::zero() {
            return Err(Error::DomainViolation(format!("denominator vanishes at {x}")));
        }
        let df = &self.num_matrix.mul_vec(x) + &self.num_linear;
        let dg = &self.den_matrix.mul_vec(x) + &self.den_linear;
        Ok(df.scale(S::one() / g).axpy(-f / (g * g), &dg))
    }
}

/// Which sufficient condition backs the modulus of a quadratic fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionPremise {
    /// `B = 0`.
    ZeroDenominatorMatrix,
    /// `f ≥ 0` on `K` and `B` negative semidefinite (sampled).
    NonnegativeNumerator,
    /// `f ≤ 0` on `K` and `B` positive semidefinite (sampled).
    NonpositiveNumerator,
}

/// `h = f / g` on `K = {m ≤ g ≤ M}` with `γ = λ_min(A) / M`.
///
/// Fails with `UnverifiedPremise` when none of the sufficient conditions can
/// be confirmed; [`quadratic_fraction_unverified`] builds the entry anyway.
pub fn quadratic_fraction<S: Scalar>(params: QuadraticFraction<S>) -> Result<CatalogEntry<S>> {
    let (entry, premise) = build_quadratic_fraction(params)?;
    match premise {
        Some(_) => Ok(entry),
        None => Err(Error::UnverifiedPremise(entry.warnings.join("; "))),
    }
}

/// Same as [`quadratic_fraction`] but keeps an entry whose premise could not
/// be verified, flagging it in `warnings`.
pub fn quadratic_fraction_unverified<S: Scalar>(params: QuadraticFraction<S>) -> Result<CatalogEntry<S>> {
    Ok(build_quadratic_fraction(params)?.0)
}

fn build_quadratic_fraction<S: Scalar>(
    params: QuadraticFraction<S>,
) -> Result<(CatalogEntry<S>, Option<FractionPremise>)> {
    let n = params.num_matrix.dim();
    for (what, d) in [
        ("den_matrix", params.den_matrix.dim()),
        ("num_linear", params.num_linear.dim()),
        ("den_linear", params.den_linear.dim()),
    ] {
        if d != n {
            return Err(Error::InvalidParameter(format!("{what} has dimension {d}, expected {n}")));
        }
    }
    if !params.num_matrix.is_symmetric() || !params.den_matrix.is_symmetric() {
        return Err(Error::InvalidParameter("A and B must be symmetric".into()));
    }
    if !(params.lower > S::zero() && params.lower < params.upper) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < m < M, got m = {}, M = {}",
            params.lower, params.upper
        )));
    }
    let a_eig = params.num_matrix.eigenvalues();
    let a_min = a_eig[0];
    if !(a_min > 0.0) {
        return Err(Error::InvalidParameter(format!("A is not positive definite (λ_min = {a_min})")));
    }
    let gamma = S::lit(a_min) / params.upper;

    let (lo, hi) = (params.lower, params.upper);
    let shared = Arc::new(params);
    let p = shared.clone();
    let mut domain = DomainSpec::all_space()
        .with_constraint(format!("{lo} <= g(x) <= {hi}"), move |x: &Point<S>| {
            let g = p.denominator(x);
            lo <= g && g <= hi
        });
    let bbox = fraction_bounding_box(&shared)?;
    if let Some((l, u)) = &bbox {
        let constraint = domain.clone();
        domain = DomainSpec::from_kind(DomainKind::cube(l.clone(), u.clone())?)
            .with_constraint(format!("{lo} <= g(x) <= {hi}"), move |x: &Point<S>| constraint.contains(x));
    }

    let pv = shared.clone();
    let pg = shared.clone();
    let mut oracle = FunctionOracle::new(
        n,
        move |x: &Point<S>| {
            let g = pv.denominator(x);
            if g == S::zero() {
                return Err(Error::DomainViolation(format!("denominator vanishes at {x}")));
            }
            Ok(pv.numerator(x) / g)
        },
        move |x: &Point<S>| pg.gradient(x),
    )?
    .with_domain(domain)
    .with_modulus(gamma)?;

    // constant denominator: h is a quadratic with an explicit minimizer
    let mut extra = Vec::new();
    if shared.den_matrix.is_zero() && shared.den_linear.as_slice().iter().all(|v| *v == S::zero()) {
        let beta = shared.den_offset;
        if !(lo <= beta && beta <= hi) {
            return Err(Error::InvalidParameter(format!("K is empty: constant g = {beta} outside [{lo}, {hi}]")));
        }
        let a_inv = shared
            .num_matrix
            .to_nalgebra()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("A is singular".into()))?;
        let a_vec: Vec<f64> = shared.num_linear.to_f64_vec();
        let x_bar: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| a_inv[(i, j)] * a_vec[j]).sum::<f64>()).collect();
        oracle = oracle.with_lipschitz(S::lit(*a_eig.last().unwrap()) / beta)?;
        oracle = oracle.with_minimizer(Point::from_f64(&x_bar)?)?;
        extra.push(("g_constant", beta));
    }

    let mut entry = CatalogEntry::new(
        format!("quadratic_fraction(dim={n})"),
        oracle,
        "ratio of quadratics on {m <= g <= M}; modulus lambda_min(A) / M",
    )
    .with_constant("m", lo)
    .with_constant("M", hi);
    for (k, v) in extra {
        entry = entry.with_constant(k, v);
    }

    let premise = verify_fraction_premise(&shared, &entry.oracle)?;
    if premise.is_none() {
        entry.warnings.push(
            "none of the sufficient conditions (B = 0; f >= 0 on K with B <= 0; f <= 0 on K with B >= 0) \
             could be verified; the modulus is unconfirmed"
                .to_owned(),
        );
    }
    Ok((entry, premise))
}

/// Box containing `K` when `B` is definite, `None` otherwise.
fn fraction_bounding_box<S: Scalar>(p: &QuadraticFraction<S>) -> Result<Option<(Point<S>, Point<S>)>> {
    let ev = p.den_matrix.eigenvalues();
    let (sign, level) = if ev[0] > 0.0 {
        (1.0, p.upper.as_f64())
    } else if *ev.last().unwrap() < 0.0 {
        (-1.0, -p.lower.as_f64())
    } else {
        return Ok(None);
    };
    // sign * g(x) = ½ (x - c)ᵀ (sign B) (x - c) + sign * g(c) with c = -B⁻¹ b
    let b_mat = p.den_matrix.to_nalgebra() * sign;
    let b_inv = b_mat.clone().try_inverse().ok_or_else(|| Error::InvalidParameter("B is singular".into()))?;
    let b_lin: Vec<f64> = p.den_linear.to_f64_vec().iter().map(|v| v * sign).collect();
    let n = p.den_matrix.dim();
    let c: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| b_inv[(i, j)] * b_lin[j]).sum::<f64>()).collect();
    let g_c = sign * p.denominator(&Point::from_f64(&c)?).as_f64();
    let room = level - g_c;
    if room < 0.0 {
        return Err(Error::InvalidParameter("K is empty".into()));
    }
    let half: Vec<f64> = (0..n).map(|i| (2.0 * room * b_inv[(i, i)]).sqrt()).collect();
    let lo = Point::from_f64(&c.iter().zip(&half).map(|(c, w)| c - w).collect::<Vec<_>>())?;
    let hi = Point::from_f64(&c.iter().zip(&half).map(|(c, w)| c + w).collect::<Vec<_>>())?;
    Ok(Some((lo, hi)))
}

fn verify_fraction_premise<S: Scalar>(
    p: &QuadraticFraction<S>,
    oracle: &FunctionOracle<S>,
) -> Result<Option<FractionPremise>> {
    if p.den_matrix.is_zero() {
        return Ok(Some(FractionPremise::ZeroDenominatorMatrix));
    }
    let ev = p.den_matrix.eigenvalues();
    let tol = 1e-12 * ev.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let nsd = *ev.last().unwrap() <= tol;
    let psd = ev[0] >= -tol;
    if !nsd && !psd {
        return Ok(None);
    }
    let mut sampler = Sampler::new(PREMISE_SEED);
    let mut nonneg = true;
    let mut nonpos = true;
    for _ in 0..PREMISE_SAMPLES {
        let x = match sampler.domain_point(oracle, false) {
            Ok(x) => x,
            Err(Error::DomainSamplingFailure(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let f = p.numerator(&x);
        nonneg &= f >= S::zero();
        nonpos &= f <= S::zero();
    }
    Ok(if nsd && nonneg {
        Some(FractionPremise::NonnegativeNumerator)
    } else if psd && nonpos {
        Some(FractionPremise::NonpositiveNumerator)
    } else {
        None
    })
}

/// The reference instance `A = I₂, a = 0, α = 0, B = 0, b = 0, β`, `m = 1`,
/// `M = 3`: `h = ‖x‖² / (2β)`.
pub fn quadratic_fraction_example<S: Scalar>(beta: S) -> Result<CatalogEntry<S>> {
    let entry = quadratic_fraction(QuadraticFraction {
        num_matrix: Matrix::identity(2),
        num_linear: Point::zeros(2),
        num_offset: S::zero(),
        den_matrix: Matrix::zeros(2),
        den_linear: Point::zeros(2),
        den_offset: beta,
        lower: S::one(),
        upper: S::lit(3.0),
    })?;
    Ok(CatalogEntry { name: format!("quadratic_fraction_example(beta={beta})"), ..entry })
}

/// Pointwise maximum `max{h₁, h₂}` with modulus `min{γ₁, γ₂}`.
///
/// At ties (`|h₁ - h₂| < 1e-12`) the gradient of the branch with the larger
/// gradient norm is returned, the first branch winning exact ties; the tie
/// set is flagged nonsmooth.
pub fn max_combine<S: Scalar>(e1: &CatalogEntry<S>, e2: &CatalogEntry<S>) -> Result<CatalogEntry<S>> {
    let dim = e1.oracle.dim();
    if e2.oracle.dim() != dim {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: {} vs {}",
            dim,
            e2.oracle.dim()
        )));
    }
    let tie = S::lit(MAX_TIE_TOL);
    let (a, b) = (e1.oracle.clone(), e2.oracle.clone());
    let (ga, gb) = (a.clone(), b.clone());
    let (na, nb) = (a.clone(), b.clone());

    let region = match (e1.oracle.sampling_region().bounding_box(), e2.oracle.sampling_region().bounding_box()) {
        (Some(x), Some(y)) => intersect_boxes(&x, &y)
            .ok_or_else(|| Error::InvalidParameter("sampling regions do not overlap".into()))?,
        _ => unreachable!("sampling regions are bounded"),
    };
    let domain = e1.oracle.domain.intersect(&e2.oracle.domain);
    let mut oracle = FunctionOracle::new(
        dim,
        move |x: &Point<S>| Ok(a.value(x)?.max(b.value(x)?)),
        move |x: &Point<S>| {
            let (va, vb) = (ga.value(x)?, gb.value(x)?);
            if (va - vb).abs() < tie {
                let (da, db) = (ga.grad(x)?, gb.grad(x)?);
                Ok(if db.norm() > da.norm() { db } else { da })
            } else if va > vb {
                ga.grad(x)
            } else {
                gb.grad(x)
            }
        },
    )?
    .with_domain(domain.clone())
    .with_nonsmooth(move |x: &Point<S>| {
        if na.is_nonsmooth(x) || nb.is_nonsmooth(x) {
            return true;
        }
        match (na.value(x), nb.value(x)) {
            (Ok(u), Ok(v)) => (u - v).abs() < tie,
            _ => true,
        }
    });
    if !domain.kind.is_bounded() {
        oracle = oracle.with_sampling_region(DomainKind::Box { lower: region.0, upper: region.1 })?;
    }
    if let (Some(g1), Some(g2)) = (e1.gamma(), e2.gamma()) {
        oracle = oracle.with_modulus(g1.min(g2))?;
    }
    // a common minimizer of both branches minimizes the maximum
    if let (Some(x1), Some(x2)) = (e1.oracle.known_minimizer(), e2.oracle.known_minimizer()) {
        if x1 == x2 {
            oracle = oracle.with_minimizer(x1.clone())?;
        }
    }
    Ok(CatalogEntry::new(
        format!("max({},{})", e1.name, e2.name),
        oracle,
        "pointwise maximum; modulus is the smaller of the two",
    ))
}

/// `α·h` with modulus `α·γ` and Lipschitz constant `α·L`.
pub fn scale_combine<S: Scalar>(entry: &CatalogEntry<S>, alpha: S) -> Result<CatalogEntry<S>> {
    positive("alpha", alpha)?;
    let (a, b) = (entry.oracle.clone(), entry.oracle.clone());
    let inner = entry.oracle.clone();
    let mut oracle = FunctionOracle::new(
        entry.oracle.dim(),
        move |x: &Point<S>| Ok(alpha * a.value(x)?),
        move |x: &Point<S>| Ok(b.grad(x)?.scale(alpha)),
    )?
    .with_domain(entry.oracle.domain.clone())
    .with_sampling_region(entry.oracle.sampling_region().clone())?
    .with_nonsmooth(move |x: &Point<S>| inner.is_nonsmooth(x));
    if let Some(g) = entry.gamma() {
        oracle = oracle.with_modulus(alpha * g)?;
    }
    if let Some(l) = entry.lipschitz() {
        oracle = oracle.with_lipschitz(alpha * l)?;
    }
    if let Some(x) = entry.oracle.known_minimizer() {
        oracle = oracle.with_minimizer(x.clone())?;
    }
    let mut scaled = CatalogEntry::new(
        format!("scale({},{})", entry.name, alpha),
        oracle,
        "positive multiple; modulus and Lipschitz constant scale with the factor",
    );
    for (k, v) in &entry.constants {
        scaled.constants.entry(k.clone()).or_insert(*v);
    }
    Ok(scaled)
}

/// `h(x) = x² + 3 sin² x`: strongly quasiconvex and PL without being convex.
/// No modulus is known in closed form; use the estimate module.
pub fn sin_quadratic<S: Scalar>() -> CatalogEntry<S> {
    let three = S::lit(3.0);
    let two = S::lit(2.0);
    let oracle = FunctionOracle::new(
        1,
        move |x: &Point<S>| Ok(x[0] * x[0] + three * x[0].sin().powi(2)),
        move |x: &Point<S>| Ok(Point::raw(vec![two * x[0] + three * (two * x[0]).sin()])),
    )
    .expect("dimension 1")
    .with_sampling_region(DomainKind::centered_cube(1, S::lit(3.0)))
    .expect("bounded")
    .with_minimizer(Point::zeros(1))
    .expect("stationary at 0");
    CatalogEntry::new(
        "sin_quadratic",
        oracle,
        "x^2 + 3 sin^2 x: nonconvex, strongly quasiconvex, satisfies the PL inequality",
    )
}

/// `h(x) = ½⟨Dx, x⟩` with diagonal `D`, `d₁ = γ`, `d_n = L` and geometric
/// spacing in between. For `dim = 1` the single eigenvalue is `γ`.
pub fn strongly_convex_quadratic<S: Scalar>(dim: usize, gamma: S, l: S) -> Result<CatalogEntry<S>> {
    positive("gamma", gamma)?;
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if gamma > l {
        return Err(Error::InvalidParameter(format!("need gamma <= L, got {gamma} > {l}")));
    }
    let diag: Vec<S> = (0..dim)
        .map(|i| {
            if dim == 1 {
                gamma
            } else {
                let t = S::from_usize(i).unwrap() / S::from_usize(dim - 1).unwrap();
                gamma * (l / gamma).powf(t)
            }
        })
        .collect();
    let d_grad = diag.clone();
    let d_val = diag.clone();
    let oracle = FunctionOracle::new(
        dim,
        move |x: &Point<S>| {
            Ok(S::lit(0.5) * x.as_slice().iter().zip(&d_val).map(|(&xi, &di)| di * xi * xi).sum::<S>())
        },
        move |x: &Point<S>| Ok(Point::raw(x.as_slice().iter().zip(&d_grad).map(|(&xi, &di)| di * xi).collect())),
    )?
    .with_modulus(gamma)?
    .with_lipschitz(l)?
    .with_minimizer(Point::zeros(dim))?;
    Ok(CatalogEntry::new(
        format!("strongly_convex_quadratic(dim={dim},gamma={gamma},L={l})"),
        oracle,
        "diagonal quadratic with eigenvalues spanning [gamma, L]; every constant exact",
    ))
}

/// `½‖x‖²`.
pub fn half_square<S: Scalar>(dim: usize) -> Result<CatalogEntry<S>> {
    let e = strongly_convex_quadratic(dim, S::one(), S::one())?;
    Ok(CatalogEntry { name: format!("half_square(dim={dim})"), ..e })
}

/// `½‖x - c‖²`.
pub fn shifted_half_square<S: Scalar>(center: Point<S>) -> Result<CatalogEntry<S>> {
    let dim = center.dim();
    let (c1, c2) = (center.clone(), center.clone());
    let half = S::lit(0.5);
    let oracle = FunctionOracle::new(
        dim,
        move |x: &Point<S>| Ok(half * (x - &c1).norm_sq()),
        move |x: &Point<S>| Ok(x - &c2),
    )?
    .with_modulus(S::one())?
    .with_lipschitz(S::one())?
    .with_minimizer(center.clone())?;
    Ok(CatalogEntry::new(
        format!("shifted_half_square(c={center})"),
        oracle,
        "unit quadratic centred away from the origin",
    ))
}

/// `h(x) = ½ x₁²` on `R²`: the least-squares residual of the underdetermined
/// system `g(x) = x₁ = 0`. It satisfies the PL inequality with `μ = 1` but
/// its minimizers form a line, so it is not strongly quasiconvex.
pub fn pl_without_uniqueness<S: Scalar>() -> CatalogEntry<S> {
    let half = S::lit(0.5);
    let oracle = FunctionOracle::new(
        2,
        move |x: &Point<S>| Ok(half * x[0] * x[0]),
        |x: &Point<S>| Ok(Point::raw(vec![x[0], S::zero()])),
    )
    .expect("dimension 2")
    .with_minimizer(Point::zeros(2))
    .expect("stationary at 0");
    CatalogEntry::new(
        "pl_without_uniqueness",
        oracle,
        "half squared residual of one equation in two unknowns: PL holds, minimizer not unique",
    )
    .with_constant("mu", S::one())
}

/// `h(x) = x³` on `[-1, 1]`: quasiconvex (monotone) but not strongly so.
pub fn cubic<S: Scalar>() -> CatalogEntry<S> {
    let three = S::lit(3.0);
    let oracle = FunctionOracle::new(
        1,
        |x: &Point<S>| Ok(x[0].powi(3)),
        move |x: &Point<S>| Ok(Point::raw(vec![three * x[0] * x[0]])),
    )
    .expect("dimension 1")
    .with_domain(DomainSpec::from_kind(DomainKind::centered_cube(1, S::one())));
    CatalogEntry::new("cubic", oracle, "x^3 on [-1, 1]: monotone, quasiconvex, not strongly quasiconvex")
}

/// `h(x) = ⟨c, x⟩`: quasiconvex, never strongly quasiconvex.
pub fn linear<S: Scalar>(c: Point<S>) -> Result<CatalogEntry<S>> {
    let (c1, c2) = (c.clone(), c.clone());
    let oracle = FunctionOracle::new(c.dim(), move |x: &Point<S>| Ok(c1.dot(x)), move |_| Ok(c2.clone()))?;
    Ok(CatalogEntry::new(format!("linear(c={c})"), oracle, "linear function"))
}

/// Entries with a known modulus used by batch checks, in a fixed order.
pub fn modulus_entries<S: Scalar>() -> Result<Vec<CatalogEntry<S>>> {
    let quad2 = strongly_convex_quadratic(2, S::one(), S::lit(4.0))?;
    let shifted = shifted_half_square(Point::from_f64(&[1.0, 0.0])?)?;
    Ok(vec![
        half_square(1)?,
        strongly_convex_quadratic(2, S::one(), S::lit(4.0))?,
        strongly_convex_quadratic(3, S::one(), S::lit(4.0))?,
        sqrt_norm(1, S::one())?,
        sqrt_norm(2, S::one())?,
        quadratic_fraction_example(S::lit(2.0))?,
        max_combine(&quad2, &shifted)?,
        scale_combine(&sqrt_norm(2, S::one())?, S::lit(2.0))?,
        scale_combine(&quad2, S::lit(0.5))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(v: &[f64]) -> Point<f64> {
        Point::from_f64(v).unwrap()
    }

    #[test]
    fn sqrt_norm_modulus() {
        let e = sqrt_norm::<f64>(2, 1.0).unwrap();
        assert_abs_diff_eq!(e.gamma().unwrap(), 0.281_170_662_595_174_5, epsilon = 1e-12);
        let e4 = sqrt_norm::<f64>(2, 4.0).unwrap();
        assert_abs_diff_eq!(e4.gamma().unwrap(), 0.5 * e.gamma().unwrap(), epsilon = 1e-15);
        assert!(sqrt_norm::<f64>(2, 0.0).is_err());
        assert!(sqrt_norm::<f64>(2, -1.0).is_err());
    }

    #[test]
    fn sqrt_norm_value_and_gradient() {
        let e = sqrt_norm::<f64>(2, 1.0).unwrap();
        let x = p(&[1.0, 0.0]);
        assert_abs_diff_eq!(e.oracle.value(&x).unwrap(), 1.0);
        let g = e.oracle.grad(&x).unwrap();
        assert_abs_diff_eq!(g[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.0);
        assert!(matches!(e.oracle.grad(&Point::zeros(2)), Err(Error::DomainViolation(_))));
        assert!(e.oracle.is_nonsmooth(&Point::zeros(2)));
    }

    #[test]
    fn quadratic_fraction_example_values() {
        let e = quadratic_fraction_example::<f64>(2.0).unwrap();
        assert_abs_diff_eq!(e.gamma().unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let x = p(&[2.0, 0.0]);
        assert_abs_diff_eq!(e.oracle.value(&x).unwrap(), 1.0, epsilon = 1e-15);
        let g = e.oracle.grad(&x).unwrap();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.0);
        assert_eq!(e.oracle.known_minimizer(), Some(&Point::zeros(2)));
        assert!(e.warnings.is_empty());
    }

    #[test]
    fn quadratic_fraction_unit_denominator() {
        let e = quadratic_fraction(QuadraticFraction {
            num_matrix: Matrix::identity(2),
            num_linear: Point::zeros(2),
            num_offset: 0.0,
            den_matrix: Matrix::zeros(2),
            den_linear: Point::zeros(2),
            den_offset: 1.0,
            lower: 0.5,
            upper: 1.0,
        })
        .unwrap();
        assert_abs_diff_eq!(e.gamma().unwrap(), 1.0);
        let x = p(&[0.3, -0.7]);
        assert_abs_diff_eq!(e.oracle.value(&x).unwrap(), 0.5 * x.norm_sq(), epsilon = 1e-15);
    }

    #[test]
    fn quadratic_fraction_rejects_indefinite_numerator() {
        let mut params = QuadraticFraction {
            num_matrix: Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap(),
            num_linear: Point::zeros(2),
            num_offset: 0.0,
            den_matrix: Matrix::zeros(2),
            den_linear: Point::zeros(2),
            den_offset: 2.0,
            lower: 1.0,
            upper: 3.0,
        };
        assert!(matches!(quadratic_fraction(params.clone()), Err(Error::InvalidParameter(_))));
        params.num_matrix = Matrix::identity(2);
        params.lower = 3.0;
        assert!(matches!(quadratic_fraction(params), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn quadratic_fraction_sign_premises() {
        // B = I (PSD), f = ½‖x‖² + 1 > 0: neither (b) nor (c) applies
        let params = QuadraticFraction {
            num_matrix: Matrix::identity(2),
            num_linear: Point::zeros(2),
            num_offset: 1.0,
            den_matrix: Matrix::identity(2),
            den_linear: Point::zeros(2),
            den_offset: 1.0,
            lower: 1.0,
            upper: 2.0,
        };
        assert!(matches!(quadratic_fraction(params.clone()), Err(Error::UnverifiedPremise(_))));
        let e = quadratic_fraction_unverified(params.clone()).unwrap();
        assert_eq!(e.warnings.len(), 1);
        // K = {1 <= ½‖x‖² + 1 <= 2} sits inside the box [-√2, √2]²
        let (lo, hi) = e.oracle.sampling_region().bounding_box().unwrap();
        assert_abs_diff_eq!(hi[0], 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(lo[1], -(2f64.sqrt()), epsilon = 1e-12);

        // condition (c): f = ½‖x‖² - 10 <= 0 on K
        let neg = QuadraticFraction { num_offset: -10.0, ..params.clone() };
        let e = quadratic_fraction(neg).unwrap();
        assert!(e.warnings.is_empty());

        // condition (b): B = -I (NSD), f >= 0; K = {1 <= 3 - ½‖x‖² <= 2}
        let nsd = QuadraticFraction {
            den_matrix: Matrix::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap(),
            den_offset: 3.0,
            ..params
        };
        let e = quadratic_fraction(nsd).unwrap();
        assert!(e.oracle.domain.contains(&p(&[1.5, 0.0])));
        assert!(!e.oracle.domain.contains(&p(&[0.5, 0.0])));
    }

    #[test]
    fn max_combine_rules() {
        let q = |c: f64| shifted_half_square(p(&[c])).unwrap();
        let m = max_combine(&q(0.0), &q(1.0)).unwrap();
        // (x-1)² branch active at 0.25
        assert_abs_diff_eq!(m.oracle.value(&p(&[0.25])).unwrap(), 0.28125);
        assert_abs_diff_eq!(m.oracle.grad(&p(&[0.25])).unwrap()[0], -0.75);
        assert!(m.oracle.is_nonsmooth(&p(&[0.5])));
        assert_abs_diff_eq!(m.gamma().unwrap(), 1.0);

        let a = scale_combine(&q(0.0), 0.3).unwrap();
        let b = scale_combine(&q(0.0), 0.1).unwrap();
        assert_abs_diff_eq!(max_combine(&a, &b).unwrap().gamma().unwrap(), 0.1, epsilon = 1e-15);

        let same = max_combine(&q(0.0), &q(0.0)).unwrap();
        assert_eq!(same.gamma(), Some(1.0));
        assert_eq!(same.oracle.value(&p(&[0.7])).unwrap(), q(0.0).oracle.value(&p(&[0.7])).unwrap());
        assert_eq!(same.oracle.known_minimizer(), Some(&p(&[0.0])));

        let two_d = half_square::<f64>(2).unwrap();
        assert!(matches!(max_combine(&q(0.0), &two_d), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn max_tie_prefers_larger_gradient() {
        // at x = 0 both branches vanish; ‖∇(2·½x²)‖ = 0 = ‖∇(½x²)‖ so branch 1 wins
        let a = half_square::<f64>(1).unwrap();
        let b = scale_combine(&a, 2.0).unwrap();
        let m = max_combine(&a, &b).unwrap();
        assert_eq!(m.oracle.grad(&p(&[0.0])).unwrap()[0], 0.0);
        // near a tie the steeper branch is reported
        let x = p(&[1e-7]);
        assert_abs_diff_eq!(m.oracle.grad(&x).unwrap()[0], 2e-7, epsilon = 1e-20);
    }

    #[test]
    fn scale_combine_rules() {
        let base = half_square::<f64>(2).unwrap();
        let same = scale_combine(&base, 1.0).unwrap();
        let x = p(&[0.4, -1.3]);
        assert_eq!(same.oracle.value(&x).unwrap(), base.oracle.value(&x).unwrap());
        assert_eq!(same.gamma(), base.gamma());
        let three = scale_combine(&base, 3.0).unwrap();
        assert_eq!(three.oracle.grad(&p(&[1.0, 0.0])).unwrap().as_slice(), &[3.0, 0.0]);
        assert_eq!(three.lipschitz(), Some(3.0));
        let half = strongly_convex_quadratic(1, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(scale_combine(&half, 2.0).unwrap().gamma().unwrap(), 1.0);
        assert!(scale_combine(&base, 0.0).is_err());
    }

    #[test]
    fn sin_quadratic_values() {
        let e = sin_quadratic::<f64>();
        assert_eq!(e.oracle.value(&Point::zeros(1)).unwrap(), 0.0);
        assert_eq!(e.oracle.grad(&Point::zeros(1)).unwrap()[0], 0.0);
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert_abs_diff_eq!(e.oracle.value(&p(&[half_pi])).unwrap(), half_pi * half_pi + 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.oracle.value(&p(&[half_pi])).unwrap(), 5.4674, epsilon = 1e-4);
        let quarter = std::f64::consts::FRAC_PI_4;
        assert_abs_diff_eq!(e.oracle.grad(&p(&[quarter])).unwrap()[0], 4.5708, epsilon = 1e-4);
        assert!(e.gamma().is_none());
    }

    #[test]
    fn quadratic_baseline() {
        let e = strongly_convex_quadratic::<f64>(1, 1.0, 1.0).unwrap();
        assert_eq!(e.oracle.value(&p(&[2.0])).unwrap(), 2.0);
        let e = strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
        assert_eq!(e.oracle.value(&p(&[1.0, 1.0])).unwrap(), 2.5);
        assert_eq!(e.oracle.grad(&p(&[1.0, 1.0])).unwrap().as_slice(), &[1.0, 4.0]);
        let e = strongly_convex_quadratic::<f64>(3, 1.0, 4.0).unwrap();
        assert_abs_diff_eq!(e.oracle.grad(&p(&[1.0, 1.0, 1.0])).unwrap()[1], 2.0, epsilon = 1e-15);
        assert!(strongly_convex_quadratic::<f64>(2, 2.0, 1.0).is_err());
    }

    #[test]
    fn metadata_serializes() {
        let e = sqrt_norm::<f64>(2, 1.0).unwrap();
        let m = e.metadata();
        assert_eq!(m.dim, 2);
        assert!(m.constants.contains_key("gamma"));
        assert!(m.constants.contains_key("r"));
    }
}
