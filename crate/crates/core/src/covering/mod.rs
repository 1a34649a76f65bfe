//! The greedy covering of a rectangle family and the decompositions used to
//! bound its overlap, with numeric checks of each asserted estimate.

mod mkappa;
mod pairs;
mod select;
mod udecomp;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{rects_intersect, Rect};
use crate::maximal::RectFamily;
use crate::sampling::Sampler;
use crate::vectorfield::VectorField;

pub use mkappa::{segment_term, square_term, KappaOperator};
pub use pairs::{classify_pairs, in_same_direction_class};
pub use select::{
    containment_points, priority, replay_selection_log, select_covering, CoveringResult, ReplayReport,
    SelectionEvent, SelectionLog, CONTAINMENT_LATTICE,
};
pub use udecomp::{
    build_I_intervals, build_U, build_all_intervals, dyadic, finest_level, principal_holds, Group, UDecomposition,
};
pub use verify::{
    check_lemma_geo, check_lemma_samedirection, check_lemma_stromberg, gap_violations, triple_overlaps, union_area,
    verify_estimates, EstimateReport,
};

/// Hosts for the transversal estimates: each selected `ρ` with `𝒯_ρ`, then
/// each discarded rectangle `h` with the selected `R` meeting it that are no
/// longer than `h` and not in its same-direction class.
pub fn hosts(cr: &CoveringResult, fam: &RectFamily) -> Result<Vec<(Rect, Vec<Rect>)>> {
    let sel = pairs::index(fam, &cr.selected)?;
    let mut out = Vec::new();
    for rho in &sel {
        if let Some(ids) = cr.t_rho.get(&rho.id) {
            out.push((**rho, pairs::index(fam, ids)?.into_iter().copied().collect()));
        }
    }
    for h in pairs::index(fam, &cr.discarded)? {
        let t: Vec<Rect> = sel
            .iter()
            .filter(|r| r.len() <= h.len() && rects_intersect(r, h) && !in_same_direction_class(h, r))
            .map(|r| **r)
            .collect();
        if !t.is_empty() {
            out.push((*h, t));
        }
    }
    Ok(out)
}

/// Everything computed for one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub covering: CoveringResult,
    pub decompositions: Vec<UDecomposition>,
    pub reports: Vec<EstimateReport>,
}

/// Selection, pair classification, host decompositions, interval loops and
/// every check, for one family.
pub fn analyze(fam: &RectFamily, v: &VectorField, kappa: u32, s: &Sampler) -> Result<Analysis> {
    let cr = select_covering(fam, kappa)?;
    let cr = classify_pairs(cr, fam, v.lip())?;
    let decompositions = hosts(&cr, fam)?
        .par_iter()
        .map(|(rho, t)| {
            let mut ud = build_U(rho, t, v, s)?;
            build_all_intervals(&mut ud)?;
            Ok(ud)
        })
        .collect::<Result<Vec<_>>>()?;
    let reports = verify_estimates(&cr, &decompositions, fam)?;
    Ok(Analysis { covering: cr, decompositions, reports })
}
