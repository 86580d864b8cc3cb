//! Decoupled edge spectra, Dirichlet/non-Dirichlet bracketing of the
//! positive branch, and the Weyl-type asymptotic fit.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::assembly::assemble_structured;
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::graph::{Edge, End, EndpointRef, MetricGraph, Vertex, VertexCondition, WeightSign};
use crate::scalar::Real;
use crate::spectrum::{DefiniteSlicer, PencilSlicer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecoupledKind {
    Dirichlet,
    NonDirichlet,
}

/// Sign convention for the natural conditions of the non-Dirichlet
/// decoupling. `Paper` flips the sign of `f` at both ends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum NondSign {
    #[default]
    Form,
    Paper,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoupledEdge<T> {
    pub edge_id: String,
    pub weight: WeightSign,
    pub mesh: usize,
    /// Spectral parameter values (`ν` on positive edges, `−ν` on negative ones).
    pub values: Vec<T>,
    /// Whether the scalar problem on this edge is positive definite.
    pub positive_definite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplicityEntry {
    pub value: f64,
    pub nu: usize,
    pub nu_plus: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoupledSpectrum<T> {
    pub kind: DecoupledKind,
    pub per_edge: Vec<DecoupledEdge<T>>,
    /// Ascending union over positive edges, with the contributing edge.
    pub merged_positive: Vec<(T, usize)>,
    pub multiplicity_table: Vec<MultiplicityEntry>,
}

impl<T: Real> DecoupledSpectrum<T> {
    pub fn merged_values(&self) -> Vec<T> {
        self.merged_positive.iter().map(|p| p.0).collect()
    }

    /// Edges whose scalar problem is not positive definite.
    pub fn violations(&self) -> Vec<&str> {
        self.per_edge.iter().filter(|e| !e.positive_definite).map(|e| e.edge_id.as_str()).collect()
    }

    pub fn meshes(&self) -> Vec<usize> {
        self.per_edge.iter().map(|e| e.mesh).collect()
    }

    pub fn per_edge_map(&self) -> BTreeMap<&str, &[T]> {
        self.per_edge.iter().map(|e| (e.edge_id.as_str(), e.values.as_slice())).collect()
    }
}

fn single_edge_graph<T: Real>(g: &MetricGraph<T>, e: usize, kind: DecoupledKind, sign: NondSign) -> MetricGraph<T> {
    let edge = &g.edges()[e];
    let cond = |end: End| match kind {
        DecoupledKind::Dirichlet => VertexCondition::Dirichlet,
        DecoupledKind::NonDirichlet => {
            let f = g.endpoint_f(EndpointRef::new(e, end));
            let f = if sign == NondSign::Paper { -f } else { f };
            let mut map = BTreeMap::new();
            if f != T::zero() {
                map.insert(EndpointRef::new(0, end), f);
            }
            VertexCondition::Robin { f: map }
        }
    };
    MetricGraph::from_parts(
        vec![Edge::new(&edge.id, "start", "end", WeightSign::Positive, edge.potential.clone(), edge.mesh)],
        vec![Vertex::new("start", cond(End::Start)), Vertex::new("end", cond(End::Terminal))],
    )
}

/// Solves each edge as a one-edge problem with Dirichlet or natural end
/// conditions and merges the spectra. `count` values are kept per edge.
pub fn decoupled_spectrum<T: Real>(g: &MetricGraph<T>, kind: DecoupledKind, sign: NondSign, count: usize) -> Result<DecoupledSpectrum<T>> {
    g.ensure_valid()?;
    let mut per_edge = Vec::with_capacity(g.edge_count());
    for (i, edge) in g.edges().iter().enumerate() {
        let one = single_edge_graph(g, i, kind, sign);
        let st = assemble_structured(&one)?;
        let n = count.min(st.form.dim());
        let nu = DefiniteSlicer::new(&st.form, &st.unsigned_mass).smallest(n.max(1).min(st.form.dim()))?;
        let top = nu.last().copied().unwrap_or(T::one()).abs().max(T::one());
        let positive_definite = nu.first().is_some_and(|&v| v > T::lit(1e-9) * top);
        let w: T = edge.weight.value();
        let mut values: Vec<T> = nu.into_iter().take(n).map(|v| w * v).collect();
        if !edge.weight.is_positive() {
            values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        }
        per_edge.push(DecoupledEdge {
            edge_id: edge.id.clone(),
            weight: edge.weight,
            mesh: edge.mesh,
            values,
            positive_definite,
        });
    }

    let mut merged: Vec<(T, usize)> = per_edge
        .iter()
        .enumerate()
        .filter(|(_, e)| e.weight.is_positive())
        .flat_map(|(i, e)| e.values.iter().map(move |&v| (v, i)))
        .collect();
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut all: Vec<(f64, bool)> = per_edge
        .iter()
        .flat_map(|e| e.values.iter().map(move |v| (v.to_f64_lossy(), e.weight.is_positive())))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut table: Vec<MultiplicityEntry> = Vec::new();
    for (v, pos) in all {
        match table.last_mut() {
            Some(last) if (v - last.value).abs() <= 1e-8 * v.abs().max(1.0) => {
                last.nu += 1;
                last.nu_plus += pos as usize;
            }
            _ => table.push(MultiplicityEntry {
                value: v,
                nu: 1,
                nu_plus: pos as usize,
            }),
        }
    }

    Ok(DecoupledSpectrum {
        kind,
        per_edge,
        merged_positive: merged,
        multiplicity_table: table,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketRow {
    pub n: usize,
    pub lambda_n: f64,
    pub lambda: f64,
    pub lambda_d: f64,
    pub pass: bool,
    /// `λ_n − λ_n^N`
    pub lower_slack: f64,
    /// `λ_n^D − λ_n`
    pub upper_slack: f64,
    /// False when `λ_n^N` comes from an edge whose scalar problem is not
    /// positive definite.
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketReport {
    pub rows: Vec<BracketRow>,
    pub tolerance: f64,
    pub requested: usize,
    pub truncated: bool,
    pub unverified_edges: Vec<String>,
    pub all_pass: bool,
}

/// Rounding allowance added to every bound, relative.
const ROUNDING: f64 = 1e-10;

/// Compares the coupled positive branch with the merged decoupled spectra.
/// `tol` is relative; rows stop at the shortest list.
pub fn verify_bracketing<T: Real>(
    coupled: &[T],
    coupled_meshes: &[usize],
    lower: &DecoupledSpectrum<T>,
    upper: &DecoupledSpectrum<T>,
    tol: f64,
    requested: usize,
) -> Result<BracketReport> {
    if lower.meshes() != coupled_meshes || upper.meshes() != coupled_meshes {
        return Err(Error::NonNested);
    }
    let available = coupled.len().min(lower.merged_positive.len()).min(upper.merged_positive.len());
    let count = requested.min(available);
    let mut rows = Vec::with_capacity(count);
    let triples = lower.merged_positive.iter().zip(coupled).zip(&upper.merged_positive);
    for (k, ((&(ln, src), &l), &(ld, _))) in triples.take(count).enumerate() {
        let (ln, l, ld) = (ln.to_f64_lossy(), l.to_f64_lossy(), ld.to_f64_lossy());
        let allow = |x: f64| (tol + ROUNDING) * x.abs();
        let pass = ln <= l + allow(l) && l <= ld + allow(ld);
        rows.push(BracketRow {
            n: k + 1,
            lambda_n: ln,
            lambda: l,
            lambda_d: ld,
            pass,
            lower_slack: l - ln,
            upper_slack: ld - l,
            verified: lower.per_edge[src].positive_definite,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(BracketReport {
        rows,
        tolerance: tol,
        requested,
        truncated: count < requested,
        unverified_edges: lower.violations().into_iter().map(str::to_string).collect(),
        all_pass,
    })
}

/// The first `n` positive-branch eigenvalues at the graph's own meshes.
pub fn positive_eigenvalues<T: Real>(g: &MetricGraph<T>, n: usize) -> Result<Vec<T>> {
    let st = assemble_structured(g)?;
    PencilSlicer::new(&st.form, &st.signed_mass)?.positive(n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceGate {
    pub mesh: Vec<usize>,
    pub max_change: f64,
    pub worst_n: usize,
    pub threshold: f64,
    pub passed: bool,
}

/// Relative change of `λ_1..λ_n` under `m → 2m` on every edge.
pub fn convergence_gate<T: Real>(g: &MetricGraph<T>, n: usize, threshold: f64) -> Result<ConvergenceGate> {
    let coarse = positive_eigenvalues(g, n)?;
    let fine = positive_eigenvalues(&g.with_mesh_scaled(2), n)?;
    let (mut worst_n, mut max_change) = (0, 0.0f64);
    for (k, (a, b)) in coarse.iter().zip(&fine).enumerate() {
        let c = ((*a - *b).abs() / b.abs()).to_f64_lossy();
        if c > max_change {
            max_change = c;
            worst_n = k + 1;
        }
    }
    Ok(ConvergenceGate {
        mesh: g.edges().iter().map(|e| e.mesh).collect(),
        max_change,
        worst_n,
        threshold,
        passed: max_change < threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: usize,
    pub sqrt_lambda: f64,
    pub model: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest deviation of `√λ_n` from the fitted line.
    pub max_residual: f64,
    /// `π / length(G⁺)`, with unit edges `length(G⁺)` = number of positive edges.
    pub target_slope: f64,
    pub slope_rel_error: f64,
    /// `max |√λ_n − n·target_slope|`
    pub max_remainder: f64,
    pub n_range: (usize, usize),
    pub points: Vec<FitPoint>,
}

/// Least-squares line through `(n, √λ_n)` for `n ∈ [lo, hi]`; `positive`
/// holds `λ_1, λ_2, …`.
pub fn asymptotic_fit<T: Real>(positive: &[T], positive_edges: usize, lo: usize, hi: usize) -> Result<AsymptoticFit> {
    if hi > positive.len() {
        return Err(Error::NotEnoughEigenvalues {
            requested: hi,
            available: positive.len(),
        });
    }
    let pts: Vec<(f64, f64)> = (lo..=hi).map(|n| (n as f64, positive[n - 1].to_f64_lossy().sqrt())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let target = std::f64::consts::PI / positive_edges as f64;
    let points: Vec<FitPoint> = pts
        .iter()
        .map(|&(n, y)| FitPoint {
            n: n as usize,
            sqrt_lambda: y,
            model: slope * n + intercept,
        })
        .collect();
    let max_residual = points.iter().map(|p| (p.sqrt_lambda - p.model).abs()).fold(0.0, f64::max);
    let max_remainder = points.iter().map(|p| (p.sqrt_lambda - p.n as f64 * target).abs()).fold(0.0, f64::max);
    Ok(AsymptoticFit {
        slope,
        intercept,
        max_residual,
        target_slope: target,
        slope_rel_error: (slope - target).abs() / target,
        max_remainder,
        n_range: (lo, hi),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub gate: ConvergenceGate,
    pub fit: AsymptoticFit,
}

/// Convergence gate followed by the fit over `n ∈ [lo, hi]`.
pub fn asymptotics<T: Real>(g: &MetricGraph<T>, lo: usize, hi: usize, threshold: f64) -> Result<AsymptoticsReport> {
    let gate = convergence_gate(g, hi, threshold)?;
    if !gate.passed {
        return Err(Error::MeshTooCoarse {
            worst_n: gate.worst_n,
            max_change: gate.max_change,
        });
    }
    let values = positive_eigenvalues(g, hi)?;
    let fit = asymptotic_fit(&values, g.positive_edge_count(), lo, hi)?;
    Ok(AsymptoticsReport { gate, fit })
}

/// Largest mismatch between the decoupled values of the weight-negated
/// graph and the negated original values, relative.
pub fn sign_flip_residual<T: Real>(g: &MetricGraph<T>, kind: DecoupledKind, sign: NondSign, count: usize) -> Result<f64> {
    let a = decoupled_spectrum(g, kind, sign, count)?;
    let b = decoupled_spectrum(&g.with_weights_negated(), kind, sign, count)?;
    let mut worst = 0.0f64;
    for (ea, eb) in a.per_edge.iter().zip(&b.per_edge) {
        if ea.weight != eb.weight.flipped() {
            return Ok(f64::INFINITY);
        }
        for (x, y) in ea.values.iter().zip(&eb.values) {
            let r = ((*x + *y).abs() / x.abs().max(T::min_positive_value())).to_f64_lossy();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// `n,lambda_N,lambda,lambda_D,pass`
pub fn write_bracket_csv<W: Write>(report: &BracketReport, mut w: W) -> io::Result<()> {
    writeln!(w, "n,lambda_N,lambda,lambda_D,pass")?;
    for r in &report.rows {
        writeln!(w, "{},{},{},{},{}", r.n, fmt_f64(r.lambda_n), fmt_f64(r.lambda), fmt_f64(r.lambda_d), r.pass)?;
    }
    Ok(())
}

/// `n,sqrt_lambda,model`
pub fn write_fit_csv<W: Write>(fit: &AsymptoticFit, mut w: W) -> io::Result<()> {
    writeln!(w, "n,sqrt_lambda,model")?;
    for p in &fit.points {
        writeln!(w, "{},{},{}", p.n, fmt_f64(p.sqrt_lambda), fmt_f64(p.model))?;
    }
    Ok(())
}
