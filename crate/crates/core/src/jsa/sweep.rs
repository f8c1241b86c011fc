use crate::dispersion::{CrystalSpec, SellmeierModel};
use crate::error::{Error, Result};
use crate::exec::Execution;

use super::{
    apply_filters, build_jsa_with, relative_count_rate, visibility_from_jsa_with, FilterSpec,
    FrequencyGrid, Jsa, JsaOptions, PumpSpec,
};

/// One point of a filter-bandwidth sweep. `bandwidth_nm == None` is the
/// unfiltered reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSweepRow {
    pub bandwidth_nm: Option<f64>,
    pub visibility: f64,
    pub relative_rate: f64,
}

/// Visibility and relative coincidence rate versus filter half-width.
///
/// The first row is the unfiltered amplitude; the remaining rows follow in
/// order of decreasing bandwidth.
#[allow(clippy::too_many_arguments)]
pub fn filter_sweep(
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    grid: &FrequencyGrid,
    model: &SellmeierModel,
    options: &JsaOptions,
    filter_center_nm: f64,
    bandwidths_nm: &[f64],
    exec: Execution,
) -> Result<Vec<FilterSweepRow>> {
    if bandwidths_nm.is_empty() {
        return Err(Error::invalid("bandwidths_nm", "must not be empty"));
    }
    if let Some(b) = bandwidths_nm.iter().find(|b| !(**b > 0.0)) {
        return Err(Error::invalid(
            "bandwidths_nm",
            format!("{b} is not positive"),
        ));
    }
    let mut sorted = bandwidths_nm.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let jsa = build_jsa_with(crystal, pump, grid, model, options, exec)?;
    let mut rows = vec![FilterSweepRow {
        bandwidth_nm: None,
        visibility: visibility_from_jsa_with(&jsa, Execution::Sequential)?,
        relative_rate: 1.0,
    }];
    let filtered: Vec<Result<FilterSweepRow>> = exec.map_slice(&sorted, |&b| {
        let (visibility, relative_rate) = filtered_point(&jsa, filter_center_nm, b)?;
        Ok(FilterSweepRow {
            bandwidth_nm: Some(b),
            visibility,
            relative_rate,
        })
    });
    for row in filtered {
        rows.push(row?);
    }
    Ok(rows)
}

fn filtered_point(jsa: &Jsa, center_nm: f64, half_width_nm: f64) -> Result<(f64, f64)> {
    let filter = FilterSpec {
        center_nm,
        ..FilterSpec::gaussian(half_width_nm)
    };
    let f = apply_filters(jsa, &filter)?;
    Ok((
        visibility_from_jsa_with(&f, Execution::Sequential)?,
        relative_count_rate(&f, jsa)?,
    ))
}

/// Filter bandwidth at which the visibility reaches a target value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityCrossing {
    pub bandwidth_nm: f64,
    pub visibility: f64,
    pub relative_rate: f64,
}

/// Finds, by bisection on `[lo_nm, hi_nm]`, the widest filter for which the
/// visibility of `jsa` reaches `target`. Visibility must be at or above the
/// target at `lo_nm` and below it at `hi_nm`.
pub fn bandwidth_for_visibility(
    jsa: &Jsa,
    center_nm: f64,
    target: f64,
    lo_nm: f64,
    hi_nm: f64,
) -> Result<VisibilityCrossing> {
    let (v_lo, _) = filtered_point(jsa, center_nm, lo_nm)?;
    let (v_hi, _) = filtered_point(jsa, center_nm, hi_nm)?;
    if !(v_lo >= target && v_hi < target) {
        return Err(Error::invalid(
            "bracket",
            format!("visibility {v_lo} .. {v_hi} does not bracket {target}"),
        ));
    }
    let (mut lo, mut hi) = (lo_nm, hi_nm);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (v, _) = filtered_point(jsa, center_nm, mid)?;
        if v >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
    }
    let (visibility, relative_rate) = filtered_point(jsa, center_nm, lo)?;
    Ok(VisibilityCrossing {
        bandwidth_nm: lo,
        visibility,
        relative_rate,
    })
}
