//! Quenched Ruelle–Perron–Frobenius operator and the eigen-triple.
//!
//! On each fiber the operator `𝓛_ω g(x) = Σ_{f_ω(y)=x} e^{φ_ω(y)} g(y)` is
//! discretized as a sparse matrix: output node `x_k` collects, for every
//! preimage `y`, the weight `e^{φ(y)}` times the linear interpolation of `g`
//! at `y`. The triple is then obtained from two sweeps along the θ-orbit:
//!
//! * `h̃_j`: normalized forward iteration of `1` from fiber `-N_b`;
//! * `ν_j`: normalized iteration of the transposed matrices from Lebesgue
//!   measure at fiber `n + N_b` down to fiber 0.
//!
//! With `λ_j = ∫ 𝓛_j 1 dν_{j+1}` and `h_j = h̃_j / ∫ h̃_j dν_j`, the discrete
//! eigen-equations `𝓛_j h_j = λ_j h_{j+1}` and `𝓛_j^* ν_{j+1} = λ_j ν_j` hold
//! to rounding.

use rayon::prelude::*;
use serde::Serialize;

use crate::base::BaseSample;
use crate::error::{Error, Result};
use crate::fiber::{FiberMap, FiberPotential, ModelSpec, Phase, PotentialSpec, Preimage};
use crate::space::{Boundary, Grid, GridFunction};

/// Something that can be evaluated at a point of a fiber.
pub trait Observable: Sync {
    fn value(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> Observable for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

impl Observable for GridFunction {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    y: f64,
    i0: u32,
    i1: u32,
    t: f64,
    w: f64,
}

/// Discretized transfer operator of one fiber.
#[derive(Debug, Clone)]
pub struct FiberOperator {
    pub map: FiberMap,
    pub potential: FiberPotential,
    pub grid: Grid,
    deg: usize,
    entries: Vec<Entry>,
}

impl FiberOperator {
    pub fn new(map: FiberMap, potential: FiberPotential, grid: Grid) -> Result<Self> {
        let deg = map.degree();
        let rows: Vec<Result<Vec<Entry>>> = (0..grid.n)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(deg),
                |buf: &mut Vec<Preimage>, k| {
                    map.preimages_into(grid.node(k), buf)?;
                    Ok(buf
                        .iter()
                        .map(|p| {
                            let (i0, i1, t) = grid.stencil(p.y);
                            Entry { y: p.y, i0: i0 as u32, i1: i1 as u32, t, w: potential.eval(p.y).exp() }
                        })
                        .collect())
                },
            )
            .collect();
        let mut entries = Vec::with_capacity(grid.n * deg);
        for r in rows {
            let r = r?;
            debug_assert_eq!(r.len(), deg);
            entries.extend(r);
        }
        Ok(Self { map, potential, grid, deg, entries })
    }

    /// Operator of fiber `θ^j ω`.
    pub fn at(model: &ModelSpec, potential: &PotentialSpec, sample: &BaseSample, j: i64, grid: Grid) -> Result<Self> {
        let w = sample.at(j)?;
        Self::new(model.fiber(w), potential.at(w), grid)
    }

    fn row(&self, k: usize) -> &[Entry] {
        &self.entries[k * self.deg..(k + 1) * self.deg]
    }

    /// `𝓛 g` on nodal values.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.grid.n)
            .into_par_iter()
            .map(|k| {
                self.row(k)
                    .iter()
                    .map(|e| e.w * ((1.0 - e.t) * g[e.i0 as usize] + e.t * g[e.i1 as usize]))
                    .sum()
            })
            .collect()
    }

    /// `𝓛 g` for an observable evaluated exactly at the preimages.
    pub fn apply_exact(&self, g: &dyn Observable) -> Vec<f64> {
        (0..self.grid.n)
            .into_par_iter()
            .map(|k| self.row(k).iter().map(|e| e.w * g.value(e.y)).sum())
            .collect()
    }

    /// `𝓛 1` at every node.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.grid.n).map(|k| self.row(k).iter().map(|e| e.w).sum()).collect()
    }

    /// Transposed action on node weights: `(𝓛ᵀ v)_i`.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n];
        for (k, &vk) in v.iter().enumerate() {
            if vk == 0.0 {
                continue;
            }
            for e in self.row(k) {
                out[e.i0 as usize] += vk * e.w * (1.0 - e.t);
                out[e.i1 as usize] += vk * e.w * e.t;
            }
        }
        out
    }
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `𝓛_ω g` on the fiber `θω`.
pub fn apply_transfer(model: &ModelSpec, potential: &PotentialSpec, sample: &BaseSample, g: &GridFunction) -> Result<GridFunction> {
    let op = FiberOperator::at(model, potential, sample, 0, g.grid)?;
    Ok(GridFunction { grid: g.grid, values: op.apply(&g.values) })
}

/// Normalized pullback `𝓛ⁿ g / ∫ 𝓛ⁿ g dm` from fiber `θ^{-n} ω` to ω.
pub fn normalized_pullback_from(
    model: &ModelSpec,
    potential: &PotentialSpec,
    sample: &BaseSample,
    n: usize,
    g0: &GridFunction,
) -> Result<GridFunction> {
    let grid = g0.grid;
    let wts = grid.weights();
    let mut g = g0.values.clone();
    let s = dot(&wts, &g);
    g.iter_mut().for_each(|v| *v /= s);
    for j in -(n as i64)..0 {
        let op = FiberOperator::at(model, potential, sample, j, grid)?;
        g = op.apply(&g);
        let s = dot(&wts, &g);
        g.iter_mut().for_each(|v| *v /= s);
        check_finite(&g, "normalized pullback")?;
    }
    Ok(GridFunction { grid, values: g })
}

/// `h̃ = 𝓛̃ⁿ 1` and the sup-gap between the depth-`n` and depth-`(n-1)` iterates.
pub fn normalized_pullback_iterate(
    model: &ModelSpec,
    potential: &PotentialSpec,
    sample: &BaseSample,
    n: usize,
    grid: Grid,
) -> Result<(GridFunction, f64)> {
    if n == 0 {
        return Err(Error::Precondition("pullback depth must be at least 1".into()));
    }
    let one = GridFunction::constant(grid, 1.0);
    let a = normalized_pullback_from(model, potential, sample, n, &one)?;
    let b = normalized_pullback_from(model, potential, sample, n - 1, &one)?;
    let gap = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok((a, gap))
}

/// Numerical parameters of [`solve_triple`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleParams {
    pub window: usize,
    pub burn_in: usize,
    pub grid_size: usize,
    /// Largest accepted gap between burn-in depths `N_b` and `N_b - 1`.
    pub tol: f64,
}

impl TripleParams {
    pub fn new(window: usize, burn_in: usize, grid_size: usize) -> Self {
        Self { window, burn_in, grid_size, tol: 1e-8 }
    }
}

/// The eigen-triple along the window `θ^j ω`, `j = 0..=n`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenTriple {
    pub grid: Grid,
    pub window: usize,
    pub burn_in: usize,
    /// λ(θ^j ω), `j = 0..n`.
    pub lambda: Vec<f64>,
    /// Densities h_j, `j = 0..=n`, with ∫ h_j dν_j = 1.
    pub h: Vec<GridFunction>,
    /// Node weights of ν_j, each summing to 1.
    pub nu: Vec<Vec<f64>>,
    /// Node weights of μ_j = h_j ν_j, each summing to 1.
    pub mu: Vec<Vec<f64>>,
    /// Relative sup-gap of h₀ between burn-in depths `N_b` and `N_b - 1`.
    pub h_gap: f64,
    /// ℓ¹ gap of ν_n between burn-in depths `N_b` and `N_b - 1`.
    pub nu_gap: f64,
    /// Fitted per-step projective contraction factor of the h-sweep.
    pub contraction_rate: Option<f64>,
    #[serde(skip)]
    pub sample: BaseSample,
}

impl EigenTriple {
    /// Product λ(ω)···λ(θ^{n-1}ω) in log form.
    pub fn log_lambda_sum(&self, n: usize) -> f64 {
        self.lambda[..n].iter().map(|l| l.ln()).sum()
    }
}

fn fit_log_slope(values: &[(f64, f64)]) -> Option<f64> {
    if values.len() < 3 {
        return None;
    }
    let n = values.len() as f64;
    let mx = values.iter().map(|p| p.0).sum::<f64>() / n;
    let my = values.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = values.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = values.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Build `(λ, h, ν, μ)` along `θ^j ω`, `j = 0..=n`.
pub fn solve_triple(model: &ModelSpec, potential: &PotentialSpec, sample: &BaseSample, params: TripleParams) -> Result<EigenTriple> {
    let TripleParams { window: n, burn_in: nb, grid_size, tol } = params;
    if nb < 2 {
        return Err(Error::Precondition("burn-in must be at least 2".into()));
    }
    let lo = -(nb as i64);
    let hi = (n + nb) as i64;
    if !sample.covers(lo, hi) {
        let (wlo, whi) = sample.window();
        return Err(Error::OutOfWindow { k: if lo < wlo { lo } else { hi }, lo: wlo, hi: whi });
    }
    let grid = Grid::for_phase(model.phase(), grid_size)?;
    let leb = grid.weights();
    let normalize_leb = |g: &mut Vec<f64>| {
        let s = dot(&leb, g);
        g.iter_mut().for_each(|v| *v /= s);
    };

    // h-sweep: chain `a` starts at fiber -N_b, chain `b` one fiber later.
    let mut a = vec![1.0; grid.n];
    let mut b = vec![1.0; grid.n];
    let mut h_tilde: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut theta_trace = Vec::new();
    let mut h_gap = 0.0;
    for j in lo..n as i64 {
        let op = FiberOperator::at(model, potential, sample, j, grid)?;
        a = op.apply(&a);
        normalize_leb(&mut a);
        check_finite(&a, "h sweep")?;
        if j > lo {
            b = op.apply(&b);
            normalize_leb(&mut b);
            let theta = a.iter().zip(&b).map(|(x, y)| (x / y).ln()).fold((f64::NEG_INFINITY, f64::INFINITY), |(mx, mn), r| (mx.max(r), mn.min(r)));
            let th = theta.0 - theta.1;
            if th > 1e-13 && th.is_finite() {
                theta_trace.push(((j - lo) as f64, th.ln()));
            }
        }
        if j + 1 == 0 {
            let sup = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            h_gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / sup;
        }
        if j + 1 >= 0 {
            h_tilde.push(a.clone());
        }
    }
    debug_assert_eq!(h_tilde.len(), n + 1);
    if h_gap > tol {
        return Err(Error::BurnInInsufficient { burn_in: nb, gap: h_gap, tol, suggested: 2 * nb });
    }

    // ν-sweep: transposed iteration from Lebesgue at fiber n + N_b.
    let mut va = leb.clone();
    let mut vb = leb.clone();
    let mut nu_rev: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut row_sums_rev: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut nu_gap = 0.0;
    for j in (0..hi).rev() {
        let op = FiberOperator::at(model, potential, sample, j, grid)?;
        if j < n as i64 {
            row_sums_rev.push(op.row_sums());
        }
        va = op.apply_transpose(&va);
        let s: f64 = va.iter().sum();
        va.iter_mut().for_each(|v| *v /= s);
        check_finite(&va, "nu sweep")?;
        if j < hi - 1 {
            vb = op.apply_transpose(&vb);
            let s: f64 = vb.iter().sum();
            vb.iter_mut().for_each(|v| *v /= s);
        } else {
            vb = leb.clone();
            let s: f64 = vb.iter().sum();
            vb.iter_mut().for_each(|v| *v /= s);
        }
        if j as usize == n {
            nu_gap = va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).sum();
        }
        if j as usize <= n {
            nu_rev.push(va.clone());
        }
    }
    if nu_gap > tol {
        return Err(Error::BurnInInsufficient { burn_in: nb, gap: nu_gap, tol, suggested: 2 * nb });
    }
    nu_rev.reverse();
    row_sums_rev.reverse();
    let nu = nu_rev;
    let lambda: Vec<f64> = (0..n).map(|j| dot(&nu[j + 1], &row_sums_rev[j])).collect();

    let mut h = Vec::with_capacity(n + 1);
    let mut mu = Vec::with_capacity(n + 1);
    for (j, ht) in h_tilde.into_iter().enumerate() {
        let s = dot(&nu[j], &ht);
        let vals: Vec<f64> = ht.iter().map(|v| v / s).collect();
        let mut m: Vec<f64> = vals.iter().zip(&nu[j]).map(|(a, b)| a * b).collect();
        let ms: f64 = m.iter().sum();
        m.iter_mut().for_each(|v| *v /= ms);
        h.push(GridFunction { grid, values: vals });
        mu.push(m);
    }

    let contraction_rate = fit_log_slope(&theta_trace).map(f64::exp);
    Ok(EigenTriple {
        grid,
        window: n,
        burn_in: nb,
        lambda,
        h,
        nu,
        mu,
        h_gap,
        nu_gap,
        contraction_rate,
        sample: sample.clone(),
    })
}

/// Largest violation of `deg·e^{inf φ} ≤ λ ≤ deg·e^{sup φ}` (0 when all hold).
pub fn lambda_bound_violation(triple: &EigenTriple, model: &ModelSpec, potential: &PotentialSpec) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (j, &l) in triple.lambda.iter().enumerate() {
        let w = triple.sample.at(j as i64)?;
        let deg = model.fiber(w).degree() as f64;
        let st = potential.at(w).stats();
        let lo = deg * st.inf.exp();
        let hi = deg * st.sup.exp();
        let slack = 1e-12 * hi;
        worst = worst.max(lo - slack - l).max(l - hi - slack);
    }
    Ok(worst.max(0.0))
}

fn check_index(triple: &EigenTriple, j: usize) -> Result<()> {
    if j >= triple.window {
        return Err(Error::Precondition(format!("fiber index {j} needs j+1 inside the window of {}", triple.window)));
    }
    Ok(())
}

/// |∫𝓛_j g dν_{j+1} − λ_j ∫ g dν_j| / ‖g‖_∞ with `g` evaluated exactly at preimages.
pub fn duality_residual(
    triple: &EigenTriple,
    model: &ModelSpec,
    potential: &PotentialSpec,
    g: &dyn Observable,
    j: usize,
) -> Result<f64> {
    check_index(triple, j)?;
    let op = FiberOperator::at(model, potential, &triple.sample, j as i64, triple.grid)?;
    let lg = op.apply_exact(g);
    let nodal: Vec<f64> = triple.grid.nodes().iter().map(|&x| g.value(x)).collect();
    let sup = nodal.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let lhs = dot(&triple.nu[j + 1], &lg);
    let rhs = triple.lambda[j] * dot(&triple.nu[j], &nodal);
    Ok((lhs - rhs).abs() / sup.max(f64::MIN_POSITIVE))
}

/// |∫ test∘f_j dμ_j − ∫ test dμ_{j+1}|.
pub fn invariance_residual(triple: &EigenTriple, model: &ModelSpec, test: &dyn Observable, j: usize) -> Result<f64> {
    check_index(triple, j)?;
    let map = model.fiber_at(&triple.sample, j as i64)?;
    let nodes = triple.grid.nodes();
    let lhs: f64 = nodes.iter().zip(&triple.mu[j]).map(|(&x, m)| m * test.value(map.eval(x))).sum();
    let rhs: f64 = nodes.iter().zip(&triple.mu[j + 1]).map(|(&x, m)| m * test.value(x)).sum();
    Ok((lhs - rhs).abs())
}

/// |ν_{j+1}(f_j A) − ∫_A λ_j e^{−φ_j} dν_j| for an interval `A = [a, b]`
/// inside one injectivity domain.
pub fn jacobian_check(
    triple: &EigenTriple,
    model: &ModelSpec,
    potential: &PotentialSpec,
    a: f64,
    b: f64,
    j: usize,
) -> Result<f64> {
    check_index(triple, j)?;
    if !(a < b) || b - a > 1.0 {
        return Err(Error::Domain(format!("[{a}, {b}] is not a proper interval")));
    }
    let w = triple.sample.at(j as i64)?;
    let map = model.fiber(w);
    let phi = potential.at(w);
    let cuts = branch_cuts(&map);
    if cuts.iter().any(|&c| (c > a && c < b) || (c + 1.0 > a && c + 1.0 < b && map.phase() == Phase::Circle)) {
        return Err(Error::Domain(format!("[{a}, {b}] straddles a branch cut")));
    }
    let mid = 0.5 * (a + b);
    let fa = map.eval_branch(wrap_for(map.phase(), a), map.branch_of(wrap_for(map.phase(), mid)));
    let len = map.lift_delta(mid, b - mid) - map.lift_delta(mid, a - mid);
    let image_mass = triple.grid.interval_mass(&triple.nu[j + 1], fa, fa + len);

    let grid = triple.grid;
    let lam = triple.lambda[j];
    let mut rhs = 0.0;
    for (k, &wk) in triple.nu[j].iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        let (lo, hi) = grid.cell(k);
        for shift in shifts(grid.boundary) {
            let (clo, chi) = (lo + shift, hi + shift);
            let ov_lo = a.max(clo);
            let ov_hi = b.min(chi);
            if ov_hi > ov_lo {
                let x = 0.5 * (ov_lo + ov_hi);
                rhs += wk * (ov_hi - ov_lo) / (chi - clo) * lam * (-phi.eval(x)).exp();
            }
        }
    }
    Ok((image_mass - rhs).abs())
}

fn shifts(b: Boundary) -> &'static [f64] {
    match b {
        Boundary::Periodic => &[-1.0, 0.0, 1.0],
        Boundary::Clamped => &[0.0],
    }
}

fn wrap_for(phase: Phase, x: f64) -> f64 {
    match phase {
        Phase::Circle => x.rem_euclid(1.0),
        Phase::Interval => x,
    }
}

/// Interior boundaries between injectivity domains.
pub fn branch_cuts(map: &FiberMap) -> Vec<f64> {
    match *map {
        FiberMap::Circle { k, shift, .. } => (0..k).map(|i| (i as f64 / k as f64 + shift).rem_euclid(1.0)).collect(),
        FiberMap::IntervalMp { .. } => vec![0.5],
        FiberMap::IntervalConvex { .. } => vec![],
    }
}
