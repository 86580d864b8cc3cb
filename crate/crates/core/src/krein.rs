//! Indefinite inner product diagnostics on the discrete space.
//!
//! `[u, v] = (Bu, v)` is the signed mass. `S = F⁻¹B` is F-self-adjoint with
//! eigenvalues `μ = 1/λ`; `P±` project F-orthogonally onto the eigenvectors
//! with `±λ > 0`, and `Q±` restrict edge-wise nodal values to `G±`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::DiscreteForm;
use crate::error::{Error, Result};
use crate::graph::WeightSign;
use crate::linalg::{dot, orthogonal_complement, Cholesky, Matrix, SymmetricEigen};
use crate::scalar::Real;
use crate::spectrum::{Eigenpair, SpectrumResult};

fn check_dim<T: Real>(d: &DiscreteForm<T>, u: &[T]) -> Result<()> {
    if u.len() != d.dof_count() {
        return Err(Error::DimensionMismatch {
            expected: d.dof_count(),
            got: u.len(),
        });
    }
    Ok(())
}

/// `[u, v]`
pub fn indefinite_inner<T: Real>(u: &[T], v: &[T], d: &DiscreteForm<T>) -> Result<T> {
    check_dim(d, u)?;
    check_dim(d, v)?;
    Ok(d.krein(u, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cone {
    #[serde(rename = "C+")]
    Positive,
    #[serde(rename = "C-")]
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeEntry {
    pub index: i64,
    pub lambda: f64,
    pub krein: f64,
    pub cone: Cone,
}

/// Tags every eigenpair by the sign of `[y, y]` and checks it against `λ`.
pub fn classify_cone<T: Real>(s: &SpectrumResult<T>, d: &DiscreteForm<T>) -> Result<Vec<ConeEntry>> {
    s.iter()
        .map(|p| {
            let k = d.krein(&p.vector, &p.vector);
            let l2 = d.l2(&p.vector, &p.vector);
            let cone = if k > T::zero() { Cone::Positive } else { Cone::Negative };
            let agrees = (k > T::zero()) == (p.lambda > T::zero());
            if !agrees || k.abs() < T::lit(1e-10) * l2 {
                return Err(Error::ConeViolation {
                    index: p.index,
                    krein: k.to_f64_lossy(),
                    lambda: p.lambda.to_f64_lossy(),
                });
            }
            Ok(ConeEntry {
                index: p.index,
                lambda: p.lambda.to_f64_lossy(),
                krein: k.to_f64_lossy(),
                cone,
            })
        })
        .collect()
}

/// `S = F⁻¹ B` as an explicit matrix.
pub fn build_s<T: Real>(d: &DiscreteForm<T>) -> Result<Matrix<T>> {
    let chol = Cholesky::new(&d.form_matrix).map_err(|e| Error::NotPositiveDefinite {
        detail: format!("Cholesky breakdown at pivot {}", e.pivot),
    })?;
    Ok(chol.solve_matrix(&d.signed_mass))
}

/// `Σ w(p) y yᵀ F` over the given eigenpairs.
fn spectral_sum<T: Real>(d: &DiscreteForm<T>, pairs: &[&Eigenpair<T>], w: impl Fn(&Eigenpair<T>) -> T) -> Matrix<T> {
    let n = d.dof_count();
    let mut out = Matrix::zeros(n, n);
    for p in pairs {
        let fy = d.form_matrix.mul_vec(&p.vector);
        let c = w(p);
        for i in 0..n {
            let a = c * p.vector[i];
            if a == T::zero() {
                continue;
            }
            for (j, &b) in fy.iter().enumerate() {
                out[(i, j)] += a * b;
            }
        }
    }
    out
}

/// Projectors in reduced coordinates; `Q±` act on edge-wise nodal vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProjections<T> {
    pub p_plus: Matrix<T>,
    pub p_minus: Matrix<T>,
    /// Onto the kernel of the signed mass (eigenvalues at infinity).
    pub p_infinite: Matrix<T>,
    pub q_plus: Matrix<T>,
    pub q_minus: Matrix<T>,
}

pub fn spectral_projections<T: Real>(d: &DiscreteForm<T>, s: &SpectrumResult<T>) -> SpectralProjections<T> {
    let pos: Vec<&Eigenpair<T>> = s.positive.iter().collect();
    let neg: Vec<&Eigenpair<T>> = s.negative.iter().collect();
    let kernel: Vec<Eigenpair<T>> = s
        .kernel
        .iter()
        .map(|v| Eigenpair {
            index: 0,
            lambda: T::infinity(),
            vector: v.clone(),
        })
        .collect();
    let kernel_refs: Vec<&Eigenpair<T>> = kernel.iter().collect();
    let lay = d.layout();
    let mask = |w: WeightSign| {
        let ones = vec![T::one(); lay.full_dim];
        Matrix::from_diagonal(&lay.mask(&ones, w))
    };
    SpectralProjections {
        p_plus: spectral_sum(d, &pos, |_| T::one()),
        p_minus: spectral_sum(d, &neg, |_| T::one()),
        p_infinite: spectral_sum(d, &kernel_refs, |_| T::one()),
        q_plus: mask(WeightSign::Positive),
        q_minus: mask(WeightSign::Negative),
    }
}

/// `|S| = S(P₊ − P₋) = Σ |μ_n| y_n y_nᵀ F`.
pub fn abs_s<T: Real>(d: &DiscreteForm<T>, s: &SpectrumResult<T>) -> Matrix<T> {
    let pairs: Vec<&Eigenpair<T>> = s.iter().collect();
    spectral_sum(d, &pairs, |p| T::one() / p.lambda.abs())
}

/// F-coefficients `F(y_n, u)` of `u` in the eigenbasis.
fn coefficients<T: Real>(d: &DiscreteForm<T>, pairs: &[Eigenpair<T>], u: &[T]) -> Vec<T> {
    let fu = d.form_matrix.mul_vec(u);
    pairs.iter().map(|p| dot(&p.vector, &fu)).collect()
}

/// `‖u‖_S = F(|S|u, u)^{1/2}`
pub fn s_norm<T: Real>(u: &[T], d: &DiscreteForm<T>, s: &SpectrumResult<T>) -> Result<T> {
    check_dim(d, u)?;
    let fu = d.form_matrix.mul_vec(u);
    let mut acc = T::zero();
    for p in s.iter() {
        let c = dot(&p.vector, &fu);
        acc += c * c / p.lambda.abs();
    }
    if acc < -T::lit(1e-12) {
        return Err(Error::NegativeRadicand(acc.to_f64_lossy()));
    }
    Ok(acc.max(T::zero()).sqrt())
}

fn unsigned_norm<T: Real>(u: &[T], d: &DiscreteForm<T>) -> T {
    d.l2(u, u).max(T::zero()).sqrt()
}

/// Edge-wise norm `‖Q w‖` of an edge-wise vector in the unsigned mass.
fn masked_norm_sq<T: Real>(d: &DiscreteForm<T>, w: &[T], sign: WeightSign) -> T {
    let lay = d.layout();
    let m = lay.mask(w, sign);
    lay.full_mass_inner(&m, &m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormConstants {
    /// Extremes of `‖u‖_S / ‖u‖` over the random probes.
    pub probe_min: f64,
    pub probe_max: f64,
    /// Extremes over the whole space (generalized eigenvalues of the Gram pair).
    pub gram_min: f64,
    pub gram_max: f64,
}

/// Seeded probes with entries uniform in `[−1, 1]`.
pub fn random_probes<T: Real>(dim: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect())
        .collect()
}

pub fn norm_constants<T: Real>(d: &DiscreteForm<T>, s: &SpectrumResult<T>, probes: &[Vec<T>]) -> Result<NormConstants> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for u in probes {
        let den = unsigned_norm(u, d);
        if den == T::zero() {
            continue;
        }
        let r = (s_norm(u, d, s)? / den).to_f64_lossy();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    // Gram matrix of the S-inner product is F|S|.
    let gram = d.form_matrix.matmul(&abs_s(d, s));
    let mut gram = gram;
    gram.symmetrize();
    let mass = Cholesky::new(&d.unsigned_mass).map_err(|_| Error::NoConvergence)?;
    let eig = SymmetricEigen::new(&mass.whiten(&gram)).map_err(|_| Error::NoConvergence)?;
    let first = eig.values.first().copied().unwrap_or(T::zero()).max(T::zero());
    let last = eig.values.last().copied().unwrap_or(T::zero()).max(T::zero());
    Ok(NormConstants {
        probe_min: if lo.is_finite() { lo } else { 0.0 },
        probe_max: hi,
        gram_min: first.sqrt().to_f64_lossy(),
        gram_max: last.sqrt().to_f64_lossy(),
    })
}

/// Relative residual of `‖Vu‖² = ‖u‖_S² + ‖Wu‖²` per probe, with
/// `V = Q₊P₊ + Q₋P₋` and `W = Q₊P₋ + Q₋P₊`.
pub fn verify_vw_identity<T: Real>(d: &DiscreteForm<T>, s: &SpectrumResult<T>, probes: &[Vec<T>]) -> Result<Vec<f64>> {
    let lay = d.layout();
    probes
        .iter()
        .map(|u| {
            check_dim(d, u)?;
            let cp = coefficients(d, &s.positive, u);
            let cn = coefficients(d, &s.negative, u);
            let combine = |pairs: &[Eigenpair<T>], c: &[T]| {
                let mut out = vec![T::zero(); d.dof_count()];
                for (p, &ci) in pairs.iter().zip(c) {
                    crate::linalg::axpy(ci, &p.vector, &mut out);
                }
                lay.embed(&out)
            };
            let pu = combine(&s.positive, &cp);
            let mu = combine(&s.negative, &cn);
            let v2 = masked_norm_sq(d, &pu, WeightSign::Positive) + masked_norm_sq(d, &mu, WeightSign::Negative);
            let w2 = masked_norm_sq(d, &mu, WeightSign::Positive) + masked_norm_sq(d, &pu, WeightSign::Negative);
            let sn = s_norm(u, d, s)?;
            if v2 == T::zero() {
                return Ok(0.0);
            }
            Ok(((v2 - sn * sn - w2).abs() / v2).to_f64_lossy())
        })
        .collect()
}

/// Relative Frobenius residual between the adjoint of `V` (S-inner product
/// on the domain, unsigned mass on edge-wise vectors) and `P₊Q₊ + P₋Q₋`.
pub fn adjoint_residual<T: Real>(d: &DiscreteForm<T>, s: &SpectrumResult<T>) -> f64 {
    let lay = d.layout();
    let z = lay.constraint_basis();
    let pr = spectral_projections(d, s);
    let v = pr.q_plus.matmul(&z.matmul(&pr.p_plus)).add(&pr.q_minus.matmul(&z.matmul(&pr.p_minus)));
    let full_mass = Matrix::from_fn(lay.full_dim, lay.full_dim, |i, j| {
        let mut e = vec![T::zero(); lay.full_dim];
        e[j] = T::one();
        lay.full_mass_mul(&e)[i]
    });
    // Pseudo-inverse of the S Gram matrix on the finite spectrum: Y|Λ|Yᵀ.
    let n = d.dof_count();
    let mut ginv = Matrix::zeros(n, n);
    for p in s.iter() {
        let w = p.lambda.abs();
        for i in 0..n {
            for j in 0..n {
                ginv[(i, j)] += w * p.vector[i] * p.vector[j];
            }
        }
    }
    let adjoint = ginv.matmul(&v.transpose()).matmul(&full_mass);
    // Extension of P± to edge-wise functions: P± w = Σ λ_n [w, y_n] y_n.
    let signed_full = Matrix::from_fn(lay.full_dim, lay.full_dim, |i, j| {
        let sign = if pr.q_plus[(i, i)] == T::one() { T::one() } else { -T::one() };
        sign * full_mass[(i, j)]
    });
    let ext = |pairs: &[Eigenpair<T>]| {
        let mut out = Matrix::zeros(n, n);
        for p in pairs {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += p.lambda * p.vector[i] * p.vector[j];
                }
            }
        }
        out.matmul(&z.transpose()).matmul(&signed_full)
    };
    let expected = ext(&s.positive).matmul(&pr.q_plus).add(&ext(&s.negative).matmul(&pr.q_minus));
    let scale = expected.frobenius_norm().max(T::min_positive_value());
    (adjoint.sub(&expected).frobenius_norm() / scale).to_f64_lossy()
}

/// `d_{n+1}(y₁, …, y_n)`: the smallest positive eigenvalue of the pencil
/// restricted to the B-orthogonal complement of the first `n` positive
/// eigenvectors.
pub fn maxmin_value<T: Real>(n: usize, d: &DiscreteForm<T>, s: &SpectrumResult<T>) -> Result<T> {
    if n + 1 > s.positive.len() {
        return Err(Error::NotEnoughEigenvalues {
            requested: n + 1,
            available: s.positive.len(),
        });
    }
    let dim = d.dof_count();
    let basis = if n == 0 {
        Matrix::identity(dim)
    } else {
        let cols: Vec<Vec<T>> = s.positive[..n].iter().map(|p| d.signed_mass.mul_vec(&p.vector)).collect();
        orthogonal_complement(&Matrix::from_columns(&cols, dim))
    };
    let k = d.form_matrix.congruence(&basis);
    let b = d.signed_mass.congruence(&basis);
    let chol = Cholesky::new(&k).map_err(|e| Error::NotPositiveDefinite {
        detail: format!("restricted form breakdown at pivot {}", e.pivot),
    })?;
    let eig = SymmetricEigen::new(&chol.whiten(&b)).map_err(|_| Error::NoConvergence)?;
    let scale = eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    match eig.values.last() {
        Some(&mu) if mu > T::lit(1e-12) * scale => Ok(T::one() / mu),
        _ => Err(Error::PositiveConeEmpty),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramSpectrum {
    pub truncation: usize,
    pub min_eig: f64,
    pub max_eig: f64,
}

/// Extreme eigenvalues of the Gram matrix of the normalized `Q₊y_n`,
/// `n = 1..N`, in the unsigned mass on `G⁺`.
pub fn halfrange_gram<T: Real>(s: &SpectrumResult<T>, d: &DiscreteForm<T>, truncation: usize) -> Result<GramSpectrum> {
    if truncation > s.positive.len() {
        return Err(Error::NotEnoughEigenvalues {
            requested: truncation,
            available: s.positive.len(),
        });
    }
    let lay = d.layout();
    let mut restricted = Vec::with_capacity(truncation);
    for p in &s.positive[..truncation] {
        let w = lay.mask(&lay.embed(&p.vector), WeightSign::Positive);
        let norm = lay.full_mass_inner(&w, &w).max(T::zero()).sqrt();
        if norm < T::lit(1e-12) {
            return Err(Error::VanishesOnPositive(p.index));
        }
        restricted.push(w.iter().map(|&x| x / norm).collect::<Vec<T>>());
    }
    let mw: Vec<Vec<T>> = restricted.iter().map(|w| lay.full_mass_mul(w)).collect();
    let gram = Matrix::from_fn(truncation, truncation, |i, j| dot(&restricted[i], &mw[j]));
    let mut gram = gram;
    gram.symmetrize();
    let eig = SymmetricEigen::new(&gram).map_err(|_| Error::NoConvergence)?;
    Ok(GramSpectrum {
        truncation,
        min_eig: eig.values.first().map_or(0.0, |v| v.to_f64_lossy()),
        max_eig: eig.values.last().map_or(0.0, |v| v.to_f64_lossy()),
    })
}

/// Structural residuals of `S`, `P±` and `Q±`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OperatorChecks {
    /// `‖F S − B‖ / ‖B‖`
    pub s_self_adjoint: f64,
    /// `max |eig(S) − 1/λ_n|` relative
    pub s_eigen_agreement: f64,
    /// `‖P₊ + P₋ + P_∞ − I‖`
    pub completeness: f64,
    /// `max(‖P±² − P±‖)`
    pub idempotency: f64,
    /// `max ‖F P± − (F P±)ᵀ‖ / ‖F‖`
    pub f_self_adjoint: f64,
    /// `max |[P₊u, P₋v]| / (‖u‖‖v‖)` over probes
    pub b_orthogonality: f64,
    /// `‖|S| − S(P₊ − P₋)‖ / ‖|S|‖`
    pub abs_s_identity: f64,
    /// Smallest eigenvalue of `F|S|` restricted to the finite spectrum, relative.
    pub abs_s_min_positive: f64,
    pub adjoint: f64,
    /// Dimension of the kernel of the signed mass.
    pub infinite_eigenvalues: usize,
}

pub fn operator_checks<T: Real>(d: &DiscreteForm<T>, s: &SpectrumResult<T>, probes: &[Vec<T>]) -> Result<OperatorChecks> {
    let n = d.dof_count();
    let sm = build_s(d)?;
    let fs = d.form_matrix.matmul(&sm);
    let bnorm = d.signed_mass.frobenius_norm();
    let s_self_adjoint = (fs.sub(&d.signed_mass).frobenius_norm() / bnorm).to_f64_lossy();

    // S is similar to the F-whitened signed mass.
    let chol = Cholesky::new(&d.form_matrix).map_err(|e| Error::NotPositiveDefinite {
        detail: format!("Cholesky breakdown at pivot {}", e.pivot),
    })?;
    let sym = chol.whiten(&d.signed_mass);
    let eig = SymmetricEigen::new(&sym).map_err(|_| Error::NoConvergence)?;
    let mut expected: Vec<T> = s.iter().map(|p| T::one() / p.lambda).collect();
    expected.extend(s.kernel.iter().map(|_| T::zero()));
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let top = eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let s_eigen_agreement = eig
        .values
        .iter()
        .zip(&expected)
        .map(|(a, b)| ((*a - *b).abs() / top).to_f64_lossy())
        .fold(0.0, f64::max);

    let pr = spectral_projections(d, s);
    let id = Matrix::identity(n);
    let completeness = pr.p_plus.add(&pr.p_minus).add(&pr.p_infinite).sub(&id).max_abs().to_f64_lossy();
    let idem = |p: &Matrix<T>| p.matmul(p).sub(p).max_abs().to_f64_lossy();
    let idempotency = idem(&pr.p_plus).max(idem(&pr.p_minus));
    let fnorm = d.form_matrix.frobenius_norm();
    let fsa = |p: &Matrix<T>| {
        let fp = d.form_matrix.matmul(p);
        (fp.sub(&fp.transpose()).frobenius_norm() / fnorm).to_f64_lossy()
    };
    let f_self_adjoint = fsa(&pr.p_plus).max(fsa(&pr.p_minus));

    let mut b_orthogonality = 0.0f64;
    for pair in probes.windows(2) {
        let (u, v) = (&pair[0], &pair[1]);
        let a = pr.p_plus.mul_vec(u);
        let b = pr.p_minus.mul_vec(v);
        let val = d.krein(&a, &b).abs() / (unsigned_norm(u, d) * unsigned_norm(v, d));
        b_orthogonality = b_orthogonality.max(val.to_f64_lossy());
    }

    let abs = abs_s(d, s);
    let via = sm.matmul(&pr.p_plus.sub(&pr.p_minus));
    let abs_s_identity = (abs.sub(&via).frobenius_norm() / abs.frobenius_norm()).to_f64_lossy();
    // F|S| in the F-orthonormal eigenbasis is diag(|μ|).
    let min_mu = s.iter().map(|p| (T::one() / p.lambda).abs()).fold(T::infinity(), |m, v| m.min(v));
    let max_mu = s.iter().map(|p| (T::one() / p.lambda).abs()).fold(T::zero(), |m, v| m.max(v));
    let abs_s_min_positive = if s.is_empty() { 0.0 } else { (min_mu / max_mu).to_f64_lossy() };

    Ok(OperatorChecks {
        s_self_adjoint,
        s_eigen_agreement,
        completeness,
        idempotency,
        f_self_adjoint,
        b_orthogonality,
        abs_s_identity,
        abs_s_min_positive,
        adjoint: adjoint_residual(d, s),
        infinite_eigenvalues: s.kernel.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxminGap {
    pub n: usize,
    pub d: f64,
    pub lambda: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct KreinConfig {
    pub probes: usize,
    pub seed: u64,
    pub truncations: Vec<usize>,
    /// Largest `n` for `d_{n+1}`.
    pub maxmin_upto: usize,
}

impl Default for KreinConfig {
    fn default() -> Self {
        Self {
            probes: 100,
            seed: 0,
            truncations: vec![5, 10, 15, 20],
            maxmin_upto: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KreinReport {
    pub cone_table: Vec<ConeEntry>,
    pub s_norm_constants: NormConstants,
    pub vw_residuals: Vec<f64>,
    pub maxmin_gaps: Vec<MaxminGap>,
    pub gram_spectra: Vec<GramSpectrum>,
    pub operator_checks: OperatorChecks,
}

impl KreinReport {
    pub fn max_vw_residual(&self) -> f64 {
        self.vw_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_maxmin_gap(&self) -> f64 {
        self.maxmin_gaps.iter().map(|g| g.gap).fold(0.0, f64::max)
    }
}

/// Runs every diagnostic. Truncations and max-min indices beyond the
/// available positive branch are skipped.
pub fn krein_report<T: Real>(d: &DiscreteForm<T>, s: &SpectrumResult<T>, cfg: &KreinConfig) -> Result<KreinReport> {
    let probes = random_probes::<T>(d.dof_count(), cfg.probes, cfg.seed);
    let cone_table = classify_cone(s, d)?;
    let s_norm_constants = norm_constants(d, s, &probes)?;
    let vw_residuals = verify_vw_identity(d, s, &probes)?;
    let mut maxmin_gaps = Vec::new();
    for n in 0..=cfg.maxmin_upto {
        if n + 1 > s.positive.len() {
            break;
        }
        let dv = maxmin_value(n, d, s)?;
        let lam = s.positive[n].lambda;
        maxmin_gaps.push(MaxminGap {
            n,
            d: dv.to_f64_lossy(),
            lambda: lam.to_f64_lossy(),
            gap: ((dv - lam).abs() / lam).to_f64_lossy(),
        });
    }
    let mut gram_spectra = Vec::new();
    for &t in &cfg.truncations {
        if t >= 1 && t <= s.positive.len() {
            gram_spectra.push(halfrange_gram(s, d, t)?);
        }
    }
    let operator_checks = operator_checks(d, s, &probes)?;
    Ok(KreinReport {
        cone_table,
        s_norm_constants,
        vw_residuals,
        maxmin_gaps,
        gram_spectra,
        operator_checks,
    })
}

/// `N,min_eig,max_eig` rows.
pub fn write_gram_csv<W: std::io::Write>(spectra: &[GramSpectrum], mut w: W) -> std::io::Result<()> {
    use crate::format::fmt_f64;
    writeln!(w, "N,min_eig,max_eig")?;
    for g in spectra {
        writeln!(w, "{},{},{}", g.truncation, fmt_f64(g.min_eig), fmt_f64(g.max_eig))?;
    }
    Ok(())
}
