//! Constructive realization with the minimum number of noise channels, and
//! a randomized check of the matching lower bound.
//!
//! The coupling matrix is assembled from three row blocks,
//!
//! ```text
//! Λ = [Λ_out; Λ_noise; Λ_in]
//! ```
//!
//! where `Λ_out` reproduces `C`, `Λ_in` reproduces `B`, and `Λ_noise` absorbs
//! whatever skew part of the drift the other two cannot. `Λ_noise` is a
//! factor of the PSD matrix `Ξ₂ = Ξ₁ + S`, with `Ξ₁ = U†|D|U` chosen from the
//! eigen-decomposition `S = U†DU` so that `rank Ξ₂ = r/2`. Each row of
//! `Λ_noise` costs two noise channels, hence `n_v = n_u + r`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag_mode, build_gamma, build_permutation, build_selector, build_theta,
    complex_rank_via_real_embedding_scaled, frobenius, hstack, imag_part,
    psd_low_rank_factor_scaled, rank_with_scale, real_part, relative_residual, to_complex, vstack,
    ComplexMatrix, RealMatrix, TolerancePolicy,
};
use crate::realizability::{
    check_physical_realizability, compute_s_tilde, feedthrough, LtiSystem, ResidualReport,
    SkewReport,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub const HAMILTONIAN_SYMMETRY: &str = "hamiltonian symmetry";
pub const XI1_IMAGINARY: &str = "xi1 imaginary part";
pub const XI1_SQUARE_ROOT: &str = "xi1 squared vs s squared";
pub const NOISE_GRAM: &str = "noise coupling gram";
pub const B1_IMAGINARY: &str = "b1 imaginary part";
pub const IM_GRAM_TOTAL: &str = "im gram total";
pub const IM_GRAM_OUTPUT: &str = "im gram output";
pub const IM_GRAM_INPUT: &str = "im gram input";
pub const IM_GRAM_NOISE: &str = "im gram noise";
pub const DRIFT_RECONSTRUCTION: &str = "drift reconstruction";
pub const INPUT_RECONSTRUCTION: &str = "input reconstruction";
pub const OUTPUT_RECONSTRUCTION: &str = "output reconstruction";
pub const FEEDTHROUGH_FORM: &str = "feedthrough form";

/// Hamiltonian matrix `R`, coupling `Λ`, and the noise matrices `B1`, `D1`.
#[derive(Debug, Clone)]
pub struct Realization {
    /// `R`, real symmetric; `H = ½ xᵀ R x`.
    pub hamiltonian: RealMatrix,
    /// `Λ = [Λ_out; Λ_noise; Λ_in]`, `(n_v + n_u)/2 × n`; `L = Λ x`.
    pub coupling: ComplexMatrix,
    pub b1: RealMatrix,
    pub d1: RealMatrix,
    pub n_v: usize,
    pub n_u: usize,
    pub n_y: usize,
}

impl Realization {
    pub fn output_coupling(&self) -> ComplexMatrix {
        self.coupling.rows(0, self.n_y / 2).into_owned()
    }

    pub fn noise_coupling(&self) -> ComplexMatrix {
        self.coupling
            .rows(self.n_y / 2, (self.n_v - self.n_u) / 2)
            .into_owned()
    }

    pub fn input_coupling(&self) -> ComplexMatrix {
        let start = self.n_y / 2 + (self.n_v - self.n_u) / 2;
        self.coupling.rows(start, self.n_u / 2).into_owned()
    }

    /// System matrices implied by `(R, Λ)`.
    pub fn reconstruct(&self) -> Result<OscillatorMatrices> {
        oscillator_matrices(&self.hamiltonian, &self.coupling, self.n_y, self.n_u)
    }
}

/// Matrices of an open oscillator computed from its `(R, Λ)`.
#[derive(Debug, Clone)]
pub struct OscillatorMatrices {
    pub a: RealMatrix,
    /// `[B1 B]`, kept complex so the imaginary leftover can be inspected.
    pub inputs: ComplexMatrix,
    pub c: RealMatrix,
    /// `[D1 0]`.
    pub d: RealMatrix,
    pub n_v: usize,
}

impl OscillatorMatrices {
    pub fn b1(&self) -> RealMatrix {
        real_part(&self.inputs.columns(0, self.n_v).into_owned())
    }

    pub fn b(&self) -> RealMatrix {
        let n_u = self.inputs.ncols() - self.n_v;
        real_part(&self.inputs.columns(self.n_v, n_u).into_owned())
    }

    /// The `(A, B, C)` part as a validated system.
    pub fn system(&self) -> Result<LtiSystem> {
        Ok(LtiSystem::new(self.a.clone(), self.b(), self.c.clone())?)
    }
}

/// `2iΘ[−Λ† Λᵀ]Γ`; every row of `Λ` contributes two real columns.
pub fn coupling_to_inputs(coupling: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = coupling.ncols();
    let theta = to_complex(&build_theta(n)?);
    if coupling.nrows() == 0 {
        return Ok(ComplexMatrix::zeros(n, 0));
    }
    let stacked = hstack(&[&(-coupling.adjoint()), &coupling.transpose()])?;
    let gamma = build_gamma(2 * coupling.nrows())?;
    Ok(theta * stacked * gamma * Complex64::new(0.0, 2.0))
}

/// `A`, `[B1 B]`, `C`, `[D1 0]` from `(R, Λ)`; `n_v` is read off the row
/// count of `Λ`.
pub fn oscillator_matrices(
    hamiltonian: &RealMatrix,
    coupling: &ComplexMatrix,
    n_y: usize,
    n_u: usize,
) -> Result<OscillatorMatrices> {
    let n = hamiltonian.nrows();
    if coupling.ncols() != n || !hamiltonian.is_square() {
        return Err(Error::Dimension(format!(
            "R is {:?} but Λ is {:?}",
            hamiltonian.shape(),
            coupling.shape()
        )));
    }
    let channels = 2 * coupling.nrows();
    if channels < n_u + n_y {
        return Err(Error::Dimension(format!(
            "Λ has {} rows; need at least (n_y + n_u)/2 = {}",
            coupling.nrows(),
            (n_u + n_y) / 2
        )));
    }
    let n_v = channels - n_u;
    let theta = build_theta(n)?;

    let gram = coupling.adjoint() * coupling;
    let a = &theta * (hamiltonian + imag_part(&gram)) * 2.0;

    let inputs = coupling_to_inputs(coupling)?;

    let conj = coupling.conjugate();
    let quadratures = vstack(&[&(coupling + &conj), &((&conj - coupling) * I)])?;
    let sigma = to_complex(&build_selector(n_y, channels)?);
    let zero = ComplexMatrix::zeros(sigma.nrows(), sigma.ncols());
    let select = vstack(&[&hstack(&[&sigma, &zero])?, &hstack(&[&zero, &sigma])?])?;
    let p_t = to_complex(&build_permutation(n_y)?.transpose());
    let c = real_part(&(p_t * select * quadratures));

    let d = feedthrough(n_y, channels);

    Ok(OscillatorMatrices {
        a,
        inputs,
        c,
        d,
        n_v,
    })
}

/// `R = −¼(ΘA + AᵀΘᵀ)`.
pub fn hamiltonian_matrix(sys: &LtiSystem) -> Result<RealMatrix> {
    let theta = build_theta(sys.n())?;
    let theta_a = &theta * sys.a();
    Ok((&theta_a + theta_a.transpose()) * -0.25)
}

/// Output block `Λ_out = (½·Cᵀ·Pᵀ·[I; iI])ᵀ`, `n_y/2 × n`.
pub fn output_coupling(sys: &LtiSystem) -> Result<ComplexMatrix> {
    let half = sys.n_y() / 2;
    let mut stack = ComplexMatrix::zeros(sys.n_y(), half);
    for k in 0..half {
        stack[(k, k)] = Complex64::new(1.0, 0.0);
        stack[(half + k, k)] = I;
    }
    let p_t = to_complex(&build_permutation(sys.n_y())?.transpose());
    let block = to_complex(&sys.c().transpose()) * p_t * stack * Complex64::new(0.5, 0.0);
    Ok(block.transpose())
}

/// Input block `Λ_in = −i·[I 0]·P·diag(M)·Bᵀ·Θ`, `n_u/2 × n`.
pub fn input_coupling(sys: &LtiSystem) -> Result<ComplexMatrix> {
    let n_u = sys.n_u();
    let select = to_complex(&build_selector(n_u, 2 * n_u)?);
    let p = to_complex(&build_permutation(n_u)?);
    let bt_theta = to_complex(&(sys.b().transpose() * build_theta(sys.n())?));
    Ok(select * p * block_diag_mode(n_u)? * bt_theta * -I)
}

/// `Ξ₁ = U†|D|U`, returned real and exactly symmetric.
///
/// Fails when the imaginary part of the complex product exceeds
/// `residual_tol` relative to `‖S‖`.
pub fn constructive_real_part(skew: &SkewReport) -> Result<RealMatrix> {
    let tol = &skew.tol;
    let xi = skew.eigen.reconstruct_with(f64::abs);
    let imag = relative_residual(
        frobenius(&imag_part(&xi)),
        frobenius(&skew.s).max(skew.s_scale()),
    );
    if imag > tol.residual_tol {
        return Err(Error::Numerical(format!(
            "U†|D|U has relative imaginary part {imag:.3e}"
        )));
    }
    let re = real_part(&xi);
    Ok((&re + re.transpose()) * 0.5)
}

/// `Ξ₂ = Ξ₁ + S`; must be PSD of rank exactly `r/2`.
pub fn noise_gram(skew: &SkewReport, xi1: &RealMatrix) -> Result<ComplexMatrix> {
    let xi2 = to_complex(xi1) + &skew.s;
    let rank = rank_with_scale(&xi2, &skew.tol, skew.s_scale());
    if rank * 2 != skew.rank {
        return Err(Error::Factorization(format!(
            "Ξ₂ has rank {rank}, expected {}",
            skew.rank / 2
        )));
    }
    Ok(xi2)
}

/// Factor `Ξ₂ = Λ_noise†Λ_noise` with exactly `r/2` rows.
pub fn noise_coupling(skew: &SkewReport, xi2: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_low_rank_factor_scaled(xi2, skew.rank / 2, &skew.tol, skew.s_scale())
}

/// `B1 = [ΘCᵀdiag(J)  real(2iΘ[−Λ_noise† Λ_noiseᵀ]P diag(M))]` and the
/// relative imaginary part that was discarded.
pub fn noise_input_matrix(sys: &LtiSystem, noise: &ComplexMatrix) -> Result<(RealMatrix, f64)> {
    let theta = build_theta(sys.n())?;
    let leading = &theta * sys.c().transpose() * build_theta(sys.n_y())?;
    let extra = coupling_to_inputs(noise)?;
    let imag = relative_residual(frobenius(&imag_part(&extra)), frobenius(&extra));
    let b1 = hstack(&[&leading, &real_part(&extra)])?;
    Ok((b1, imag))
}

/// Everything the construction produced, with its verification report.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub realization: Realization,
    pub skew: SkewReport,
    pub xi1: RealMatrix,
    pub xi2: ComplexMatrix,
    pub residuals: ResidualReport,
}

/// Build the realization and verify it; fails with the full
/// [`Synthesis`] attached if any residual exceeds its tolerance.
pub fn synthesize_realization(sys: &LtiSystem, tol: &TolerancePolicy) -> Result<Synthesis> {
    let synthesis = build_synthesis(sys, tol)?;
    if synthesis.residuals.all_pass() {
        Ok(synthesis)
    } else {
        Err(Error::ResidualsExceeded(Box::new(synthesis)))
    }
}

/// Like [`synthesize_realization`], but returns the report even when some
/// residual fails.
pub fn build_synthesis(sys: &LtiSystem, tol: &TolerancePolicy) -> Result<Synthesis> {
    let skew = compute_s_tilde(sys, tol)?;
    let count = skew.noise_count(sys.n_u())?;

    let hamiltonian = hamiltonian_matrix(sys)?;
    let out = output_coupling(sys)?;
    let inp = input_coupling(sys)?;
    let xi1 = constructive_real_part(&skew)?;
    let xi2 = noise_gram(&skew, &xi1)?;
    let noise = noise_coupling(&skew, &xi2)?;
    let (b1, b1_imag) = noise_input_matrix(sys, &noise)?;
    let coupling = vstack(&[&out, &noise, &inp])?;
    let d1 = feedthrough(sys.n_y(), count.n_v);

    let realization = Realization {
        hamiltonian,
        coupling,
        b1,
        d1,
        n_v: count.n_v,
        n_u: sys.n_u(),
        n_y: sys.n_y(),
    };
    let residuals = verify(sys, &skew, &xi1, &xi2, &realization, b1_imag)?;

    Ok(Synthesis {
        realization,
        skew,
        xi1,
        xi2,
        residuals,
    })
}

fn verify(
    sys: &LtiSystem,
    skew: &SkewReport,
    xi1: &RealMatrix,
    xi2: &ComplexMatrix,
    real: &Realization,
    b1_imag: f64,
) -> Result<ResidualReport> {
    let tol = &skew.tol;
    let rtol = tol.residual_tol;
    let theta = build_theta(sys.n())?;
    let (a, b, c) = (sys.a(), sys.b(), sys.c());
    let mut report = ResidualReport::default();

    let r = &real.hamiltonian;
    report.push(
        HAMILTONIAN_SYMMETRY,
        relative_residual(frobenius(&(r - r.transpose())), frobenius(r)),
        tol.symmetry_tol,
    );

    let s_norm = frobenius(&skew.s).max(skew.s_scale());
    report.push(
        XI1_IMAGINARY,
        relative_residual(
            frobenius(&imag_part(&skew.eigen.reconstruct_with(f64::abs))),
            s_norm,
        ),
        rtol,
    );
    let s_sq = &skew.s * &skew.s;
    let xi1_sq = to_complex(&(xi1 * xi1));
    report.push(
        XI1_SQUARE_ROOT,
        relative_residual(
            frobenius(&(xi1_sq - &s_sq)),
            frobenius(&s_sq).max(s_norm * s_norm),
        ),
        rtol,
    );

    let noise = real.noise_coupling();
    let gram = noise.adjoint() * &noise;
    report.push(
        NOISE_GRAM,
        relative_residual(frobenius(&(&gram - xi2)), frobenius(xi2).max(s_norm)),
        rtol,
    );
    report.push(B1_IMAGINARY, b1_imag, rtol);

    // Imaginary parts of the block Gram matrices.
    let im_gram = |m: &ComplexMatrix| imag_part(&(m.adjoint() * m));
    let theta_a = &theta * a;
    let skew_drift = (&theta_a + a.transpose() * &theta) * -0.25;
    report.push(
        IM_GRAM_TOTAL,
        relative_residual(
            frobenius(&(im_gram(&real.coupling) - &skew_drift)),
            frobenius(&theta_a) * 0.5,
        ),
        rtol,
    );
    let out_target = c.transpose() * build_theta(sys.n_y())? * c * 0.25;
    report.push(
        IM_GRAM_OUTPUT,
        relative_residual(
            frobenius(&(im_gram(&real.output_coupling()) - &out_target)),
            frobenius(&out_target),
        ),
        rtol,
    );
    let in_target = &theta * b * build_theta(sys.n_u())? * b.transpose() * &theta * -0.25;
    report.push(
        IM_GRAM_INPUT,
        relative_residual(
            frobenius(&(im_gram(&real.input_coupling()) - &in_target)),
            frobenius(&in_target),
        ),
        rtol,
    );
    report.push(
        IM_GRAM_NOISE,
        relative_residual(
            frobenius(&(to_complex(&im_gram(&noise)) * I - &skew.s)),
            s_norm,
        ),
        rtol,
    );

    let rebuilt = real.reconstruct()?;
    report.push(
        DRIFT_RECONSTRUCTION,
        relative_residual(frobenius(&(&rebuilt.a - a)), frobenius(a)),
        rtol,
    );
    let inputs = to_complex(&hstack(&[&real.b1, b])?);
    report.push(
        INPUT_RECONSTRUCTION,
        relative_residual(frobenius(&(&rebuilt.inputs - &inputs)), frobenius(&inputs)),
        rtol,
    );
    report.push(
        OUTPUT_RECONSTRUCTION,
        relative_residual(frobenius(&(&rebuilt.c - c)), frobenius(c)),
        rtol,
    );
    let d_full = hstack(&[&real.d1, &RealMatrix::zeros(sys.n_y(), sys.n_u())])?;
    report.push(
        FEEDTHROUGH_FORM,
        relative_residual(frobenius(&(&rebuilt.d - &d_full)), frobenius(&d_full)),
        rtol,
    );

    report.extend(check_physical_realizability(sys, &real.b1, &real.d1, tol)?);
    Ok(report)
}

/// Randomized evidence that no real symmetric `Ξ₁` makes `Ξ₁ + iS̃/4` drop
/// below rank `r/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalityCertificate {
    pub r: usize,
    /// Random candidates drawn (the zero and constructive candidates are
    /// evaluated in addition).
    pub trials: usize,
    pub min_observed_rank: usize,
    pub lower_bound_held: bool,
    /// Trials where the direct complex rank and the real-embedding rank differed.
    pub rank_disagreements: usize,
}

impl MinimalityCertificate {
    pub fn ranks_agree(&self) -> bool {
        self.rank_disagreements == 0
    }
}

const CANDIDATE_SCALES: [f64; 3] = [1e-2, 1.0, 1e2];

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RealMatrix {
    let mut m = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0) * scale;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn random_low_rank_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RealMatrix {
    let k = rng.gen_range(0..=n);
    let mut m = RealMatrix::zeros(n, n);
    for _ in 0..k {
        let v = nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        m += &v * v.transpose() * (sign * scale);
    }
    m
}

fn candidate(
    index: usize,
    seed: u64,
    n: usize,
    magnitude: f64,
    constructive: &RealMatrix,
) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let scale = CANDIDATE_SCALES[index % 3] * magnitude;
    match (index / 3) % 3 {
        0 => random_symmetric(&mut rng, n, scale),
        1 => random_low_rank_symmetric(&mut rng, n, scale),
        _ => constructive + random_symmetric(&mut rng, n, scale),
    }
}

/// Sample `trials` real symmetric `Ξ₁` across scales (plus `Ξ₁ = 0` and the
/// constructive `U†|D|U`) and record the smallest rank of `Ξ₁ + iS̃/4`,
/// computed both directly and through the real embedding.
///
/// Trials are independent and run in parallel; each draws from its own
/// ChaCha stream, so the result depends only on `seed`.
pub fn minimality_certificate(
    sys: &LtiSystem,
    trials: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<MinimalityCertificate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let skew = compute_s_tilde(sys, tol)?;
    let r = skew.noise_count(sys.n_u())?.r;
    let n = sys.n();
    let constructive = constructive_real_part(&skew)?;
    let quarter = &skew.s_tilde * 0.25;
    let magnitude = {
        let norm = frobenius(&skew.s_tilde);
        if norm > 0.0 {
            norm
        } else {
            1.0
        }
    };
    let reference = skew.s_scale();

    let evaluate = |xi1: &RealMatrix| -> (usize, bool) {
        let direct_matrix = to_complex(xi1) + to_complex(&quarter) * I;
        let direct = rank_with_scale(&direct_matrix, tol, reference);
        match complex_rank_via_real_embedding_scaled(xi1, &quarter, tol, reference) {
            Ok(embedded) => (direct, embedded == direct),
            Err(_) => (direct, false),
        }
    };

    let fixed = [RealMatrix::zeros(n, n), constructive.clone()];
    let mut outcomes: Vec<(usize, bool)> = fixed.iter().map(evaluate).collect();
    outcomes.extend(
        (0..trials)
            .into_par_iter()
            .map(|i| evaluate(&candidate(i, seed, n, magnitude, &constructive)))
            .collect::<Vec<_>>(),
    );

    let min_observed_rank = outcomes.iter().map(|o| o.0).min().unwrap_or(0);
    let rank_disagreements = outcomes.iter().filter(|o| !o.1).count();
    Ok(MinimalityCertificate {
        r,
        trials,
        min_observed_rank,
        lower_bound_held: 2 * min_observed_rank >= r,
        rank_disagreements,
    })
}
