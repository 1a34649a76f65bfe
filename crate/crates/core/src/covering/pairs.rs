use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{rects_intersect, Rect, RectId};
use crate::maximal::RectFamily;

use super::select::CoveringResult;

/// `EX(ρ) ⊂ 10·EX(R)`.
pub fn in_same_direction_class(rho: &Rect, r: &Rect) -> bool {
    r.ex_interval().dilate(10.0).map(|a| a.contains_arc(&rho.ex_interval())).unwrap_or(true)
}

/// Lookup from id to rectangle; fails on ids missing from the family.
pub(crate) fn index<'a>(fam: &'a RectFamily, ids: &[RectId]) -> Result<Vec<&'a Rect>> {
    let by_id: HashMap<RectId, &Rect> = fam.rects().iter().map(|r| (r.id, r)).collect();
    ids.iter()
        .map(|id| by_id.get(id).copied().ok_or_else(|| Error::Precondition(format!("id {id} not in family"))))
        .collect()
}

/// Splits the intersecting pairs of `𝓡′` into the `S_R` and `𝒯_ρ` classes.
/// `lip` is the field's Lipschitz constant, used to audit that intersecting
/// pairs have nearby intervals of uncertainty.
pub fn classify_pairs(mut cr: CoveringResult, fam: &RectFamily, lip: f64) -> Result<CoveringResult> {
    let sel = index(fam, &cr.selected)?;
    cr.pairs.clear();
    cr.s_r.clear();
    cr.t_rho.clear();
    let mut ex_far = 0usize;
    let mut ex_ratio: f64 = 0.0;
    for (b, r) in sel.iter().enumerate() {
        for rho in &sel[..b] {
            if !rects_intersect(rho, r) {
                continue;
            }
            cr.pairs.push((rho.id, r.id));
            if in_same_direction_class(rho, r) {
                cr.s_r.entry(r.id).or_default().push(rho.id);
            } else {
                cr.t_rho.entry(rho.id).or_default().push(r.id);
            }
            let d = rho.ex_interval().distance(&r.ex_interval());
            let bound = 2.0 * lip * rho.len();
            if d > bound {
                ex_far += 1;
            }
            if bound > 0.0 && bound.is_finite() {
                ex_ratio = ex_ratio.max(d / bound);
            }
        }
    }
    cr.diagnostics.insert("pairs".into(), cr.pairs.len() as f64);
    cr.diagnostics.insert("pairs_same_direction".into(), cr.s_r.values().map(Vec::len).sum::<usize>() as f64);
    cr.diagnostics.insert("pairs_transversal".into(), cr.t_rho.values().map(Vec::len).sum::<usize>() as f64);
    cr.diagnostics.insert("ex_distance_exceedances".into(), ex_far as f64);
    cr.diagnostics.insert("ex_distance_max_ratio".into(), ex_ratio);
    Ok(cr)
}
