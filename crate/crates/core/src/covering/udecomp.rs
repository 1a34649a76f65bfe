#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    angle_dist, project_onto_segment, quad_intersection_area, quads_intersect, rects_intersect, Interval, Rect, RectId,
    Segment,
};
use crate::sampling::Sampler;
use crate::vectorfield::{vset_density, vset_projection, CellSet, VectorField};

/// Minimum number of overlapping rectangles for the interval threshold
/// `Σ |R′ ∩ I×J| ≥ 10·|I|·W(ρ)`, since each overlap is at most `|I|·W(ρ)`.
const THRESHOLD_MULTIPLE: f64 = 10.0;

/// One group `𝒰(R)` and its interval decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub rep: RectId,
    /// Angle between the directions of `ρ` and the representative.
    pub theta: f64,
    pub members: Vec<RectId>,
    /// `ℐ`, in the order found.
    pub intervals: Vec<Interval>,
    /// `𝓥(I)` for each interval of `ℐ`.
    pub interval_members: Vec<Vec<RectId>>,
    /// `𝓥`: members left over after the interval loop.
    pub residual: Vec<RectId>,
    /// The representative's projected density set is empty.
    pub empty_vset: bool,
}

/// Decomposition of the rectangles crossing a host `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UDecomposition {
    pub rho: Rect,
    /// The segment `2I_ρ × {α}`; its coordinate is 0 at the middle of `ρ`.
    pub segment: Segment,
    /// `𝒯_ρ` in stock order.
    pub rects: Vec<Rect>,
    /// `I_R` for each member of `rects`.
    pub projections: Vec<Option<Interval>>,
    /// `𝖵_R` for each member of `rects`.
    pub vsets: Vec<CellSet>,
    /// Sampled `|V(R)|/|R|` for each member of `rects`.
    pub densities: Vec<f64>,
    pub groups: Vec<Group>,
}

impl UDecomposition {
    pub fn position(&self, id: RectId) -> Option<usize> {
        self.rects.iter().position(|r| r.id == id)
    }

    pub fn rect(&self, id: RectId) -> &Rect {
        &self.rects[self.position(id).expect("member of decomposition")]
    }

    pub fn pitch(&self) -> f64 {
        self.vsets.first().map(|c| c.pitch).unwrap_or_else(|| CellSet::grid_for(&self.segment).pitch)
    }

    /// `I_ρ` in segment coordinates.
    pub fn host_interval(&self) -> Interval {
        let h = 0.5 * self.rho.len();
        Interval::new(-h, h)
    }

    /// `|R′ ∩ I×J_ρ|`.
    pub fn slab_area(&self, r: &Rect, i: &Interval) -> f64 {
        quad_intersection_area(&self.segment.slab(i, self.rho.wid()), &r.corners())
    }

    pub fn slab_meets(&self, r: &Rect, i: &Interval) -> bool {
        quads_intersect(&self.segment.slab(i, self.rho.wid()), &r.corners())
    }

    /// The unclipped projection of `r` onto the segment's line.
    pub fn shadow(&self, r: &Rect) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in r.corners() {
            let v = self.segment.coord(c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Interval::new(lo, hi)
    }
}

/// Groups `𝒯_ρ` by overlap of projected density sets: repeatedly take the
/// longest remaining rectangle (smallest id on ties) and gather every
/// remaining rectangle whose `𝖵` meets its `𝖵`.
pub fn build_U(rho: &Rect, t_rho: &[Rect], v: &VectorField, s: &Sampler) -> Result<UDecomposition> {
    for r in t_rho {
        if r.len() > rho.len() || !rects_intersect(r, rho) {
            return Err(Error::Precondition(format!("rectangle {} must meet and not exceed host {}", r.id, rho.id)));
        }
    }
    let segment = Segment::for_host(rho);
    let mut rects = t_rho.to_vec();
    rects.sort_by(|a, b| b.len().total_cmp(&a.len()).then(a.id.cmp(&b.id)));
    let projections = rects.iter().map(|r| project_onto_segment(r, &segment)).collect();
    let vsets = rects.iter().map(|r| vset_projection(r, &segment, v, s)).collect::<Result<Vec<_>>>()?;
    let densities = rects.iter().map(|r| vset_density(r, v, s)).collect::<Result<Vec<_>>>()?;
    let mut alive = vec![true; rects.len()];
    let mut groups = Vec::new();
    for a in 0..rects.len() {
        if !alive[a] {
            continue;
        }
        let empty = vsets[a].is_empty();
        let mut members = Vec::new();
        for b in a..rects.len() {
            if alive[b] && (b == a || vsets[a].intersects(&vsets[b])) {
                alive[b] = false;
                members.push(rects[b].id);
            }
        }
        groups.push(Group {
            rep: rects[a].id,
            theta: angle_dist(rho.dir(), rects[a].dir()),
            members,
            intervals: Vec::new(),
            interval_members: Vec::new(),
            residual: Vec::new(),
            empty_vset: empty,
        });
    }
    Ok(UDecomposition { rho: *rho, segment, rects, projections, vsets, densities, groups })
}

/// Dyadic subintervals of `base` at level `k`, left to right.
pub fn dyadic(base: &Interval, k: u32) -> impl Iterator<Item = Interval> + '_ {
    let n = 1u64 << k;
    let w = base.len() / n as f64;
    (0..n).map(move |i| Interval::new(base.lo + i as f64 * w, base.lo + (i + 1) as f64 * w))
}

/// Deepest dyadic level of `base` whose intervals are at least `pitch` long.
pub fn finest_level(base: &Interval, pitch: f64) -> u32 {
    let mut k = 0;
    while k < 40 && base.len() / (1u64 << (k + 1)) as f64 >= pitch {
        k += 1;
    }
    k
}

/// `Σ_{R′ ∈ stock, L(R′) ≥ 8|I|} |R′ ∩ I×J_ρ|`, skipping rectangles whose
/// shadow misses `I`. Returns `None` early when fewer than `need` rectangles
/// can contribute.
fn principal_sum(ud: &UDecomposition, stock: &[&Rect], i: &Interval, need: usize) -> Option<f64> {
    let near: Vec<&&Rect> =
        stock.iter().filter(|r| r.len() >= 8.0 * i.len() && ud.shadow(r).overlaps(i)).collect();
    if near.len() < need {
        return None;
    }
    Some(near.iter().map(|r| ud.slab_area(r, i)).sum())
}

/// Whether `I` meets the interval threshold for the given stock.
pub fn principal_holds(ud: &UDecomposition, stock: &[&Rect], i: &Interval) -> bool {
    principal_sum(ud, stock, i, 0).is_some_and(|s| s >= THRESHOLD_MULTIPLE * i.len() * ud.rho.wid())
}

/// The interval loop on `𝒰(rep)`: while a dyadic `I ⊂ I_rep` satisfies
/// `Σ_{L(R′) ≥ 8|I|} |R′ ∩ I×J_ρ| ≥ 10·|I|·W(ρ)`, take the longest such `I`
/// (leftmost on ties) and remove the long rectangles meeting `I×J_ρ`.
pub fn build_I_intervals(ud: &mut UDecomposition, rep: RectId) -> Result<()> {
    let g = ud
        .groups
        .iter()
        .position(|g| g.rep == rep)
        .ok_or_else(|| Error::Precondition(format!("{rep} is not a representative")))?;
    let members: Vec<Rect> = ud.groups[g].members.iter().map(|&id| *ud.rect(id)).collect();
    let mut alive = vec![true; members.len()];
    let mut intervals = Vec::new();
    let mut interval_members = Vec::new();
    let base = ud.projections[ud.position(rep).unwrap()];
    if let Some(base) = base {
        let kmax = finest_level(&base, ud.pitch());
        let need = THRESHOLD_MULTIPLE as usize;
        loop {
            let stock: Vec<&Rect> = members.iter().zip(&alive).filter(|(_, &a)| a).map(|(r, _)| r).collect();
            let mut found = None;
            'scan: for k in 0..=kmax {
                let w = base.len() / (1u64 << k) as f64;
                if stock.iter().filter(|r| r.len() >= 8.0 * w).count() < need {
                    continue;
                }
                for i in dyadic(&base, k) {
                    if let Some(sum) = principal_sum(ud, &stock, &i, need) {
                        if sum >= THRESHOLD_MULTIPLE * i.len() * ud.rho.wid() {
                            found = Some(i);
                            break 'scan;
                        }
                    }
                }
            }
            let Some(i) = found else { break };
            let mut taken = Vec::new();
            for (m, r) in members.iter().enumerate() {
                if alive[m] && r.len() >= 8.0 * i.len() && (ud.slab_meets(r, &i) || ud.slab_area(r, &i) > 0.0) {
                    alive[m] = false;
                    taken.push(r.id);
                }
            }
            intervals.push(i);
            interval_members.push(taken);
        }
    }
    let grp = &mut ud.groups[g];
    grp.intervals = intervals;
    grp.interval_members = interval_members;
    grp.residual = members.iter().zip(&alive).filter(|(_, &a)| a).map(|(r, _)| r.id).collect();
    Ok(())
}

/// Runs the interval loop for every group.
pub fn build_all_intervals(ud: &mut UDecomposition) -> Result<()> {
    let reps: Vec<RectId> = ud.groups.iter().map(|g| g.rep).collect();
    reps.into_iter().try_for_each(|r| build_I_intervals(ud, r))
}
