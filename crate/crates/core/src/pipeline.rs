//! End-to-end CVP solving through the QUBO encoding, plus the brute-force
//! oracles used to check it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{self, BoundMode, BoundReport, CvpInstance, ReducedInstance};
use crate::linalg::{self, IntMatrix};
use crate::qubo::{self, pow2, BinaryAssignment, EncodingParams, QuboMatrix, SignMode};
use crate::solve::{self, AnnealSchedule, SolveResult, DEFAULT_EXHAUSTIVE_CAP};

/// Default cap on candidate points an oracle enumeration may visit.
pub const DEFAULT_ORACLE_CAP: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Certificate {
    OracleVerified,
    QuboExhaustive,
    Heuristic,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::OracleVerified => "oracle-verified",
            Certificate::QuboExhaustive => "qubo-exhaustive",
            Certificate::Heuristic => "heuristic",
        }
    }
}

impl std::str::FromStr for Certificate {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "oracle-verified" => Ok(Certificate::OracleVerified),
            "qubo-exhaustive" => Ok(Certificate::QuboExhaustive),
            "heuristic" => Ok(Certificate::Heuristic),
            _ => Err(format!("unknown certificate '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvpSolution {
    /// Lattice coordinates: `lambda = A z`.
    pub z: Vec<BigInt>,
    pub lambda: Vec<BigInt>,
    /// `‖x − lambda‖²`.
    pub dist_sq: BigInt,
    pub certificate: Certificate,
}

impl CvpSolution {
    fn from_coords(a: &IntMatrix, x: &[BigInt], z: Vec<BigInt>, certificate: Certificate) -> Result<Self> {
        let lambda = a.mul_vec(&z)?;
        let dist_sq = dist_sq(x, &lambda);
        Ok(Self {
            z,
            lambda,
            dist_sq,
            certificate,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    /// `lambda == A z`.
    pub lambda_ok: bool,
    pub recomputed_dist_sq: BigInt,
    /// The reported `dist_sq` matches the recomputed one.
    pub dist_sq_ok: bool,
    pub qubo_identity_ok: bool,
    pub identity_samples: usize,
    pub m: u32,
    pub oracle_dist_sq: Option<BigInt>,
    pub oracle_radius: Option<BigInt>,
    pub matches_oracle: Option<bool>,
    /// Some coordinate of the reduced solution, or of the oracle optimum,
    /// has absolute value `2^m`, the edge of the encodable range.
    pub range_boundary_hit: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.lambda_ok && self.dist_sq_ok && self.qubo_identity_ok && self.matches_oracle != Some(false)
    }
}

fn dist_sq(x: &[BigInt], y: &[BigInt]) -> BigInt {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Coordinates encoded by `v`: `Bp − u` (derived) or `u − Bp` (verbatim),
/// where `B_ij = v_{jn+i}`.
pub fn decode_coords(v: &BinaryAssignment, params: &EncodingParams, sign: SignMode) -> Result<Vec<BigInt>> {
    if v.len() != params.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: params.n_vars(),
            found: v.len(),
        });
    }
    let n = params.n;
    let u = pow2(params.m);
    Ok((0..n)
        .map(|i| {
            let bp: BigInt = (0..=params.m)
                .filter(|&j| v.0[j as usize * n + i])
                .map(pow2)
                .sum();
            match sign {
                SignMode::Derived => bp - &u,
                SignMode::Verbatim => &u - bp,
            }
        })
        .collect())
}

/// Returns `(z, A z)` for an assignment.
pub fn decode(
    v: &BinaryAssignment,
    params: &EncodingParams,
    a: &IntMatrix,
    sign: SignMode,
) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    let z = decode_coords(v, params, sign)?;
    let lambda = a.mul_vec(&z)?;
    Ok((z, lambda))
}

/// Inverse of [`decode_coords`]; `None` when some coordinate is outside
/// the encodable range.
pub fn encode(z: &[BigInt], params: &EncodingParams, sign: SignMode) -> Option<BinaryAssignment> {
    if z.len() != params.n {
        return None;
    }
    let n = params.n;
    let u = pow2(params.m);
    let limit = pow2(params.m + 1);
    let mut bits = vec![false; params.n_vars()];
    for (i, zi) in z.iter().enumerate() {
        let w = match sign {
            SignMode::Derived => zi + &u,
            SignMode::Verbatim => &u - zi,
        };
        if w.is_negative() || w >= limit {
            return None;
        }
        for j in 0..=params.m {
            bits[j as usize * n + i] = w.bit(u64::from(j));
        }
    }
    Some(BinaryAssignment(bits))
}

/// Exact arithmetic used by box enumeration: `i128` when every partial
/// sum fits, `BigInt` otherwise.
trait Num: Clone + Ord + Send + Sync {
    fn from_big(v: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn nought() -> Self;
}

impl Num for i128 {
    fn from_big(v: &BigInt) -> Self {
        v.to_i128().expect("bounded")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn nought() -> Self {
        0
    }
}

impl Num for BigInt {
    fn from_big(v: &BigInt) -> Self {
        v.clone()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn nought() -> Self {
        BigInt::zero()
    }
}

/// Enumerates `z` with `z_0` fixed and `lo_i ≤ z_i ≤ hi_i` for `i ≥ 1`, in
/// lexicographic order, keeping the first strict minimum of `‖A z − x‖²`.
fn box_slice<T: Num>(cols: &[Vec<T>], x: &[T], z0: &T, lo: &[T], hi: &[T]) -> (T, Vec<T>) {
    let n = x.len();
    let one = T::from_big(&BigInt::one());
    let mut z: Vec<T> = std::iter::once(z0.clone()).chain(lo[1..].iter().cloned()).collect();
    // residual = A z − x
    let mut res: Vec<T> = x.iter().map(|xi| T::nought().sub(xi)).collect();
    for (k, zk) in z.iter().enumerate() {
        for (r, c) in res.iter_mut().zip(&cols[k]) {
            *r = r.add(&c.mul(zk));
        }
    }
    let norm = |res: &[T]| res.iter().fold(T::nought(), |acc, r| acc.add(&r.mul(r)));
    let mut best = (norm(&res), z.clone());
    loop {
        // Odometer step over coordinates n-1 .. 1.
        let mut k = n - 1;
        loop {
            if k == 0 {
                return best;
            }
            if z[k] < hi[k] {
                z[k] = z[k].add(&one);
                for (r, c) in res.iter_mut().zip(&cols[k]) {
                    *r = r.add(c);
                }
                break;
            }
            let span = hi[k].sub(&lo[k]);
            for (r, c) in res.iter_mut().zip(&cols[k]) {
                *r = r.sub(&c.mul(&span));
            }
            z[k] = lo[k].clone();
            k -= 1;
        }
        let d = norm(&res);
        if d < best.0 {
            best = (d, z.clone());
        }
    }
}

fn box_search<T: Num>(a: &IntMatrix, x: &[BigInt], lo: &[BigInt], hi: &[BigInt]) -> Vec<BigInt> {
    let n = x.len();
    let cols: Vec<Vec<T>> = (0..n).map(|j| a.column(j).iter().map(T::from_big).collect()).collect();
    let xs: Vec<T> = x.iter().map(T::from_big).collect();
    let lo_t: Vec<T> = lo.iter().map(T::from_big).collect();
    let hi_t: Vec<T> = hi.iter().map(T::from_big).collect();
    let mut firsts = Vec::new();
    let mut v = lo[0].clone();
    while v <= hi[0] {
        firsts.push(T::from_big(&v));
        v += 1;
    }
    let slice = |z0: &T| box_slice(&cols, &xs, z0, &lo_t, &hi_t);
    #[cfg(feature = "parallel")]
    let results: Vec<(T, Vec<T>)> = {
        use rayon::prelude::*;
        firsts.par_iter().map(slice).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(T, Vec<T>)> = firsts.iter().map(slice).collect();
    // Slices are in lexicographic order, so the first minimum wins ties.
    let mut best: Option<(T, Vec<T>)> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.0 < b.0) {
            best = Some(r);
        }
    }
    best.expect("non-empty box").1.iter().map(Num::to_big).collect()
}

/// Exact minimizer of `‖A z − x‖²` over the integer box `[lo, hi]`, with
/// lexicographic tie-break on `z`.
pub fn cvp_oracle_box(
    a: &IntMatrix,
    x: &[BigInt],
    lo: &[BigInt],
    hi: &[BigInt],
    cap: u64,
) -> Result<CvpSolution> {
    let n = a.cols();
    if x.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: x.len(),
        });
    }
    if lo.len() != n || hi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lo.len().min(hi.len()),
        });
    }
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Err(Error::InvalidInstance("empty enumeration box".into()));
    }
    let points: BigInt = lo.iter().zip(hi).map(|(l, h)| h - l + 1).product();
    if points > BigInt::from(cap) {
        return Err(Error::OracleCap { points: points.to_string(), cap });
    }
    // |A z − x|² ≤ n · (n·max|a|·max|z| + max|x|)²
    let amax = lattice::max_abs_entry(a);
    let zmax = lo.iter().chain(hi).map(Signed::abs).max().unwrap_or_default();
    let xmax = x.iter().map(Signed::abs).max().unwrap_or_default();
    let span = BigInt::from(n) * amax * zmax + xmax;
    let worst = BigInt::from(n) * &span * &span;
    let z = if worst.bits() < 120 {
        box_search::<i128>(a, x, lo, hi)
    } else {
        box_search::<BigInt>(a, x, lo, hi)
    };
    CvpSolution::from_coords(a, x, z, Certificate::OracleVerified)
}

/// Brute-force CVP over `z ∈ [−radius, radius]ⁿ`.
pub fn cvp_oracle_enum(a: &IntMatrix, x: &[BigInt], radius: &BigInt, cap: u64) -> Result<CvpSolution> {
    if radius.is_negative() {
        return Err(Error::InvalidInstance("oracle radius must be nonnegative".into()));
    }
    let n = a.cols();
    cvp_oracle_box(a, x, &vec![-radius.clone(); n], &vec![radius.clone(); n], cap)
}

/// Exact CVP over a box that provably contains every closest vector.
///
/// With `d` the distance achieved by rounding, any optimum satisfies
/// `|z_i − c_i| ≤ ‖row_i(A⁻¹)‖·d` where `c = A⁻¹x`, independent of the
/// bit-width bounds used by the encoding.
pub fn cvp_oracle_certified(a: &IntMatrix, x: &[BigInt], cap: u64) -> Result<CvpSolution> {
    let babai = babai_round(a, x)?;
    let coords = linalg::solve_exact(a, x)?;
    let inv = linalg::inverse_rows(a)?;
    let d2 = BigRational::from_integer(babai.dist_sq.clone());
    let mut lo = Vec::with_capacity(inv.len());
    let mut hi = Vec::with_capacity(inv.len());
    for (row, c) in inv.iter().zip(&coords.0) {
        let row_sq: BigRational = row.0.iter().map(|e| e * e).sum();
        let reach = linalg::ceil_sqrt(&(row_sq * &d2));
        lo.push(c.floor().to_integer() - &reach);
        hi.push(c.ceil().to_integer() + &reach);
    }
    cvp_oracle_box(a, x, &lo, &hi, cap)
}

/// Rounds the exact basis coordinates of `x` (halves up).
pub fn babai_round(a: &IntMatrix, x: &[BigInt]) -> Result<CvpSolution> {
    let coords = linalg::solve_exact(a, x)?;
    CvpSolution::from_coords(a, x, coords.round_half_up(), Certificate::Heuristic)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Exhaustive when `N` is within the cap, annealing otherwise.
    #[default]
    Auto,
    Exhaustive,
    Sa(Option<AnnealSchedule>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OraclePolicy {
    Off,
    /// Radius `2^m` when the enumeration fits under the cap.
    Auto,
    Radius(BigInt),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub bound_mode: BoundMode,
    pub sign: SignMode,
    pub identity_samples: usize,
    pub seed: u64,
    pub oracle: OraclePolicy,
    pub oracle_cap: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            bound_mode: BoundMode::Tight,
            sign: SignMode::Derived,
            identity_samples: 64,
            seed: 0,
            oracle: OraclePolicy::Auto,
            oracle_cap: DEFAULT_ORACLE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub bound_mode: BoundMode,
    pub sign: SignMode,
    pub method: MethodChoice,
    pub exhaustive_cap: usize,
    pub seed: u64,
    pub verify: VerifyOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            bound_mode: BoundMode::Tight,
            sign: SignMode::Derived,
            method: MethodChoice::Auto,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            seed: 0,
            verify: VerifyOptions::default(),
        }
    }
}

/// Everything produced by one run of [`solve_cvp`].
#[derive(Clone, Debug)]
pub struct CvpOutcome {
    pub solution: CvpSolution,
    pub report: VerifyReport,
    pub bounds: BoundReport,
    pub params: EncodingParams,
    pub qubo_result: SolveResult,
    /// `qubo_result.value + constant`, the squared distance to `x̂` the QUBO
    /// objective claims.
    pub qubo_objective: BigInt,
}

/// Reduce, bound, build, solve, decode and verify.
pub fn solve_cvp(inst: &CvpInstance, opts: &SolveOptions) -> Result<CvpOutcome> {
    let red = lattice::reduce_to_parallelepiped(inst)?;
    let bounds = lattice::encoding_bits(inst, opts.bound_mode)?;
    let params = EncodingParams::new(inst.dim(), bounds.m());
    let q = qubo::build_qubo(&red, &params, opts.sign)?;
    let qubo_result = match &opts.method {
        MethodChoice::Exhaustive => solve::solve_exhaustive_capped(&q, opts.exhaustive_cap)?,
        MethodChoice::Auto if q.n_vars() <= opts.exhaustive_cap => solve::solve_exhaustive_capped(&q, opts.exhaustive_cap)?,
        MethodChoice::Auto | MethodChoice::Sa(None) => {
            solve::solve_sa(&q, &AnnealSchedule::for_qubo(&q, opts.seed))?
        }
        MethodChoice::Sa(Some(s)) => solve::solve_sa(&q, s)?,
    };
    let z_hat = decode_coords(&qubo_result.assignment, &params, opts.sign)?;
    let z: Vec<BigInt> = z_hat.iter().zip(&red.floor_coords).map(|(a, b)| a + b).collect();
    let certificate = if qubo_result.proven_optimal {
        Certificate::QuboExhaustive
    } else {
        Certificate::Heuristic
    };
    let solution = CvpSolution::from_coords(inst.basis(), inst.target(), z, certificate)?;
    let qubo_objective = &qubo_result.value + &q.constant;
    let verify = VerifyOptions {
        bound_mode: opts.bound_mode,
        sign: opts.sign,
        ..opts.verify.clone()
    };
    let report = verify_with(&red, &bounds, &q, &solution, &verify)?;
    Ok(CvpOutcome {
        solution,
        report,
        bounds,
        params,
        qubo_result,
        qubo_objective,
    })
}

/// Checks a claimed solution: internal consistency, the QUBO objective
/// identity on sampled assignments, and (when feasible) an oracle.
pub fn verify_solution(inst: &CvpInstance, solution: &CvpSolution, opts: &VerifyOptions) -> Result<VerifyReport> {
    let red = lattice::reduce_to_parallelepiped(inst)?;
    let bounds = lattice::encoding_bits(inst, opts.bound_mode)?;
    let params = EncodingParams::new(inst.dim(), bounds.m());
    let q = qubo::build_qubo(&red, &params, opts.sign)?;
    verify_with(&red, &bounds, &q, solution, opts)
}

/// `vᵀQv + constant == ‖A z(v) − x̂‖²` for one assignment.
pub fn objective_identity_holds(red: &ReducedInstance, q: &QuboMatrix, v: &BinaryAssignment) -> Result<bool> {
    let params = q
        .params
        .as_ref()
        .ok_or_else(|| Error::InvalidInstance("QUBO carries no encoding parameters".into()))?;
    let (_, lambda) = decode(v, params, red.basis(), q.sign_mode)?;
    Ok(q.evaluate(v)? + &q.constant == dist_sq(&lambda, &red.x_hat))
}

fn verify_with(
    red: &ReducedInstance,
    bounds: &BoundReport,
    q: &QuboMatrix,
    solution: &CvpSolution,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let inst = &red.base;
    let n = inst.dim();
    if solution.z.len() != n || solution.lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: solution.z.len().min(solution.lambda.len()),
        });
    }
    let m = bounds.m();
    let params = EncodingParams::new(n, m);
    let lambda_ok = inst.basis().mul_vec(&solution.z)? == solution.lambda;
    let recomputed_dist_sq = dist_sq(inst.target(), &solution.lambda);
    let dist_sq_ok = recomputed_dist_sq == solution.dist_sq;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut qubo_identity_ok = objective_identity_holds(red, q, &BinaryAssignment::zeros(params.n_vars()))?;
    for _ in 0..opts.identity_samples {
        let v = BinaryAssignment((0..params.n_vars()).map(|_| rng.gen()).collect());
        qubo_identity_ok &= objective_identity_holds(red, q, &v)?;
    }

    let edge = pow2(m);
    let touches = |z: &[BigInt]| z.iter().any(|zi| zi.abs() == edge);
    let z_hat: Vec<BigInt> = solution.z.iter().zip(&red.floor_coords).map(|(a, b)| a - b).collect();
    let mut range_boundary_hit = touches(&z_hat);

    let radius = match &opts.oracle {
        OraclePolicy::Off => None,
        OraclePolicy::Radius(r) => Some(r.clone()),
        OraclePolicy::Auto => {
            let side = BigInt::from(2) * &edge + 1;
            (num_traits::Pow::pow(side, n) <= BigInt::from(opts.oracle_cap)).then(|| edge.clone())
        }
    };
    let (oracle_dist_sq, matches_oracle) = match &radius {
        Some(r) => {
            let o = cvp_oracle_enum(inst.basis(), &red.x_hat, r, opts.oracle_cap)?;
            range_boundary_hit |= touches(&o.z);
            let matches = o.dist_sq == recomputed_dist_sq;
            (Some(o.dist_sq), Some(matches))
        }
        None => (None, None),
    };

    Ok(VerifyReport {
        lambda_ok,
        recomputed_dist_sq,
        dist_sq_ok,
        qubo_identity_ok,
        identity_samples: opts.identity_samples + 1,
        m,
        oracle_dist_sq,
        oracle_radius: radius,
        matches_oracle,
        range_boundary_hit,
    })
}
