//! Observables extracted from snapshots: norms, center of mass, phase and
//! local wavenumber, peak detection, tail-train metrics, and profile
//! distances.

use crate::dynamics::WaveField;
use crate::stencil;
use crate::units::PhysicalConstants;
use std::ops::Range;
use thiserror::Error;

/// |ψ| below which the phase is flagged undefined.
pub const PHASE_DEFINED_MIN: f64 = 1e-12;
/// Default peak prominence threshold, as a fraction of the regional max.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.05;
/// Peaks below this fraction of the global |ψ| maximum do not count toward
/// a coherent train; floor-level ripples stay excluded.
pub const COHERENT_HEIGHT_FRACTION: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("field has zero norm")]
    ZeroNorm,
    #[error("phase undefined at grid index {index} inside the requested region")]
    PhaseGap { index: usize },
    #[error("fields are defined on different grids")]
    GridMismatch,
    #[error("region [{lo}, {hi}] does not intersect the grid")]
    EmptyRegion { lo: f64, hi: f64 },
}

/// Trapezoid-rule norm ∫|ψ|² dx, Å⁻².
pub fn norm(psi: &WaveField) -> f64 {
    let rho = psi.density();
    stencil::trapezoid(&rho, psi.grid.dx)
}

/// Density-weighted mean position ⟨x⟩, Å.
pub fn center_of_mass(psi: &WaveField) -> Result<f64, AnalysisError> {
    let rho = psi.density();
    let n = norm(psi);
    if n <= 0.0 {
        return Err(AnalysisError::ZeroNorm);
    }
    let weighted: Vec<f64> = psi
        .grid
        .positions()
        .zip(&rho)
        .map(|(x, &r)| x * r)
        .collect();
    Ok(stencil::trapezoid(&weighted, psi.grid.dx) / n)
}

/// Mean velocity in m/s from the finite difference of ⟨x⟩ between two
/// snapshots.
pub fn mean_velocity(
    early: &WaveField,
    late: &WaveField,
    constants: &PhysicalConstants,
) -> Result<f64, AnalysisError> {
    let dt = late.time - early.time;
    if dt == 0.0 {
        return Ok(0.0);
    }
    let v_int = (center_of_mass(late)? - center_of_mass(early)?) / dt;
    Ok(constants.velocity_to_mps(v_int))
}

/// Norm-weighted mean phase gradient Im∫ψ*ψ′dx / ∫ρdx, Å⁻¹ — the momentum
/// per particle.
pub fn mean_wavenumber(psi: &WaveField) -> Result<f64, AnalysisError> {
    let n = norm(psi);
    if n <= 0.0 {
        return Err(AnalysisError::ZeroNorm);
    }
    let dx = psi.grid.dx;
    let vals = &psi.values;
    let len = vals.len();
    let mut current = vec![0.0; len];
    for i in 1..len - 1 {
        let grad = (vals[i + 1] - vals[i - 1]) / (2.0 * dx);
        current[i] = (vals[i].conj() * grad).im;
    }
    Ok(stencil::trapezoid(&current, dx) / n)
}

/// Pointwise phase in (−π, π] with a definedness mask.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub values: Vec<f64>,
    pub defined: Vec<bool>,
}

/// Two-argument arctangent of the field; |ψ| < 1e-12 is flagged undefined.
pub fn phase_field(psi: &WaveField) -> PhaseField {
    let mut values = Vec::with_capacity(psi.values.len());
    let mut defined = Vec::with_capacity(psi.values.len());
    for v in &psi.values {
        let mut p = v.im.atan2(v.re);
        if p == -std::f64::consts::PI {
            p = std::f64::consts::PI;
        }
        values.push(p);
        defined.push(v.norm() >= PHASE_DEFINED_MIN);
    }
    PhaseField { values, defined }
}

/// Unwrap the phase over `range`, adding 2π multiples so adjacent
/// differences stay in (−π, π]. Fails with `PhaseGap` if an undefined
/// point interrupts the region.
pub fn unwrap_phase(phase: &PhaseField, range: Range<usize>) -> Result<Vec<f64>, AnalysisError> {
    let mut out = Vec::with_capacity(range.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for i in range {
        if !phase.defined[i] {
            return Err(AnalysisError::PhaseGap { index: i });
        }
        let raw = phase.values[i];
        if let Some(p) = prev {
            let mut d = raw + offset - p;
            while d > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
                d -= 2.0 * std::f64::consts::PI;
            }
            while d <= -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
                d += 2.0 * std::f64::consts::PI;
            }
        }
        let v = raw + offset;
        out.push(v);
        prev = Some(v);
    }
    Ok(out)
}

/// Local wavenumber dφ/dx over a contiguous index range: central
/// differences of the unwrapped phase, one-sided at the range ends.
pub fn local_wavenumber(
    phase: &PhaseField,
    range: Range<usize>,
    dx: f64,
) -> Result<Vec<f64>, AnalysisError> {
    let unwrapped = unwrap_phase(phase, range)?;
    let n = unwrapped.len();
    if n < 2 {
        return Ok(vec![0.0; n]);
    }
    let mut out = vec![0.0; n];
    out[0] = (unwrapped[1] - unwrapped[0]) / dx;
    for i in 1..n - 1 {
        out[i] = (unwrapped[i + 1] - unwrapped[i - 1]) / (2.0 * dx);
    }
    out[n - 1] = (unwrapped[n - 1] - unwrapped[n - 2]) / dx;
    Ok(out)
}

/// Median of |k| over the wavenumbers of a region.
pub fn median_abs_wavenumber(
    psi: &WaveField,
    region: (f64, f64),
) -> Result<f64, AnalysisError> {
    let range = index_range(psi, region)?;
    let ks = local_wavenumber(&phase_field(psi), range, psi.grid.dx)?;
    let mut mags: Vec<f64> = ks.iter().map(|k| k.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(mags[mags.len() / 2])
}

/// 95th percentile of adjacent local-wavenumber jumps over a region — a
/// roughness measure that separates a coherent train (slowly varying k)
/// from incoherent grid-scale ripple.
pub fn phase_roughness(psi: &WaveField, region: (f64, f64)) -> Result<f64, AnalysisError> {
    let range = index_range(psi, region)?;
    let ks = local_wavenumber(&phase_field(psi), range, psi.grid.dx)?;
    if ks.len() < 3 {
        return Ok(0.0);
    }
    let mut jumps: Vec<f64> = ks.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    jumps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((0.95 * jumps.len() as f64).ceil() as usize).clamp(1, jumps.len()) - 1;
    Ok(jumps[idx])
}

/// Peak inventory of a tail region.
#[derive(Debug, Clone)]
pub struct TailReport {
    /// Analyzed region (x_lo, x_hi), Å.
    pub region: (f64, f64),
    /// Positions of detected peaks, strictly increasing, Å.
    pub peak_positions: Vec<f64>,
    /// |ψ| at each peak.
    pub peak_heights: Vec<f64>,
    /// Topographic prominence of each peak.
    pub peak_prominences: Vec<f64>,
    pub peak_count: usize,
    /// Mean spacing between adjacent peaks; 0 with fewer than two peaks.
    pub mean_spacing: f64,
    /// Whether peaks move away from the drop faster than its center of
    /// mass (set by [`assess_recession`], false otherwise).
    pub recession_flag: bool,
}

fn index_range(psi: &WaveField, region: (f64, f64)) -> Result<Range<usize>, AnalysisError> {
    let g = &psi.grid;
    let lo = ((region.0 - g.x_min) / g.dx).ceil().max(0.0) as usize;
    let hi_f = ((region.1 - g.x_min) / g.dx).floor();
    if hi_f < 0.0 || lo >= g.n {
        return Err(AnalysisError::EmptyRegion {
            lo: region.0,
            hi: region.1,
        });
    }
    let hi = (hi_f as usize).min(g.n - 1);
    if lo > hi {
        return Err(AnalysisError::EmptyRegion {
            lo: region.0,
            hi: region.1,
        });
    }
    Ok(lo..hi + 1)
}

/// Detect local maxima of |ψ| in `region` with prominence at least
/// `min_prominence` times the regional maximum. Plateau peaks report their
/// leftmost index. An empty report is valid.
pub fn detect_peaks(psi: &WaveField, region: (f64, f64), min_prominence: f64) -> TailReport {
    let empty = TailReport {
        region,
        peak_positions: vec![],
        peak_heights: vec![],
        peak_prominences: vec![],
        peak_count: 0,
        mean_spacing: 0.0,
        recession_flag: false,
    };
    let range = match index_range(psi, region) {
        Ok(r) => r,
        Err(_) => return empty,
    };
    let a: Vec<f64> = psi.values[range.clone()].iter().map(|v| v.norm()).collect();
    let n = a.len();
    if n < 3 {
        return empty;
    }
    let regional_max = a.iter().cloned().fold(0.0f64, f64::max);
    if regional_max <= 0.0 {
        return empty;
    }
    let threshold = min_prominence * regional_max;

    let mut positions = Vec::new();
    let mut heights = Vec::new();
    let mut prominences = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if a[i] > a[i - 1] {
            // leftmost index of a potential plateau
            let mut j = i;
            while j + 1 < n && a[j + 1] == a[i] {
                j += 1;
            }
            if j + 1 < n && a[j + 1] < a[i] {
                let prom = prominence(&a, i);
                if prom >= threshold {
                    positions.push(psi.grid.x(range.start + i));
                    heights.push(a[i]);
                    prominences.push(prom);
                }
                i = j + 1;
                continue;
            }
            i = j + 1;
            continue;
        }
        i += 1;
    }
    let mean_spacing = if positions.len() >= 2 {
        (positions[positions.len() - 1] - positions[0]) / (positions.len() - 1) as f64
    } else {
        0.0
    };
    TailReport {
        region,
        peak_count: positions.len(),
        peak_positions: positions,
        peak_heights: heights,
        peak_prominences: prominences,
        mean_spacing,
        recession_flag: false,
    }
}

/// Topographic prominence of the peak at `p`: height above the higher of
/// the two lowest saddles separating it from higher terrain (or the
/// region boundary).
fn prominence(a: &[f64], p: usize) -> f64 {
    let h = a[p];
    let mut left_min = h;
    let mut i = p;
    while i > 0 {
        i -= 1;
        if a[i] > h {
            break;
        }
        left_min = left_min.min(a[i]);
    }
    let mut right_min = h;
    let mut i = p;
    while i + 1 < a.len() {
        i += 1;
        if a[i] > h {
            break;
        }
        right_min = right_min.min(a[i]);
    }
    h - left_min.max(right_min)
}

/// The reporting region for tail metrics: from the left grid edge to one
/// effective length behind the drop center.
pub fn tail_region(psi: &WaveField, x_eff: f64) -> Result<(f64, f64), AnalysisError> {
    let com = center_of_mass(psi)?;
    Ok((psi.grid.x_min, com - x_eff))
}

/// Count the peaks of a report that rise to drop scale: height at least
/// [`COHERENT_HEIGHT_FRACTION`] of the global |ψ| maximum.
pub fn coherent_train_count(report: &TailReport, psi: &WaveField) -> usize {
    let global_max = psi.values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    report
        .peak_heights
        .iter()
        .filter(|&&h| h >= COHERENT_HEIGHT_FRACTION * global_max)
        .count()
}

/// Tail report for `late`, with the recession flag computed against
/// `early`. Both snapshots are scanned over the late snapshot's tail
/// region; the flag is set when the mean peak position moves away from
/// the wall faster than the center of mass does. Snapshots should be at
/// least 1 ps apart for a meaningful velocity estimate.
pub fn assess_recession(
    early: &WaveField,
    late: &WaveField,
    x_eff: f64,
    min_prominence: f64,
) -> Result<TailReport, AnalysisError> {
    if early.grid.n != late.grid.n || (early.grid.dx - late.grid.dx).abs() > 1e-12 {
        return Err(AnalysisError::GridMismatch);
    }
    let region = tail_region(late, x_eff)?;
    let report_early = detect_peaks(early, region, min_prominence);
    let mut report = detect_peaks(late, region, min_prominence);
    let dt = late.time - early.time;
    if report_early.peak_count > 0 && report.peak_count > 0 && dt > 0.0 {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let v_peaks = (mean(&report.peak_positions) - mean(&report_early.peak_positions)) / dt;
        let v_com = (center_of_mass(late)? - center_of_mass(early)?) / dt;
        // wall on the right: receding = moving left faster than the drop
        report.recession_flag = v_peaks < v_com;
    }
    Ok(report)
}

/// Normalized L² distance between |a| and |b|, optionally minimized over
/// integer grid shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDistance {
    pub value: f64,
    /// Shift applied to `a` (in grid points) at the reported minimum;
    /// 0 when alignment is off.
    pub shift: isize,
}

/// L² distance of |a| from |b| normalized by ‖b‖₂. With `align`, the
/// distance is minimized over integer shifts of `a` (zero-filled), and
/// ties break toward the smallest |shift|.
pub fn profile_distance(
    a: &WaveField,
    b: &WaveField,
    align: bool,
) -> Result<ProfileDistance, AnalysisError> {
    if a.grid.n != b.grid.n || (a.grid.dx - b.grid.dx).abs() > 1e-12 {
        return Err(AnalysisError::GridMismatch);
    }
    let av = a.abs();
    let bv = b.abs();
    let bnorm2: f64 = bv.iter().map(|v| v * v).sum();
    if bnorm2 <= 0.0 {
        return Err(AnalysisError::ZeroNorm);
    }
    let n = av.len() as isize;
    let dist_at = |s: isize| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let j = i + s;
            let ai = if (0..n).contains(&j) { av[j as usize] } else { 0.0 };
            let d = ai - bv[i as usize];
            acc += d * d;
        }
        (acc / bnorm2).sqrt()
    };
    if !align {
        return Ok(ProfileDistance {
            value: dist_at(0),
            shift: 0,
        });
    }
    let mut best = ProfileDistance {
        value: f64::INFINITY,
        shift: 0,
    };
    for s in -(n - 1)..n {
        let d = dist_at(s);
        let better = d < best.value
            || (d == best.value && (s.abs() < best.shift.abs()));
        if better {
            best = ProfileDistance { value: d, shift: s };
        }
    }
    Ok(best)
}

/// Spatial mirror of a field (reflection about the grid midpoint, with
/// conjugation so a right-mover becomes a left-mover).
pub fn mirror(psi: &WaveField) -> WaveField {
    let mut values: Vec<_> = psi.values.iter().rev().map(|v| v.conj()).collect();
    values[0] = num_complex::Complex64::ZERO;
    let n = values.len();
    values[n - 1] = num_complex::Complex64::ZERO;
    WaveField {
        grid: psi.grid.clone(),
        values,
        time: psi.time,
        mode: psi.mode,
    }
}
