use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect, RectId};
use crate::maximal::RectFamily;
use crate::sampling::lattice;

use super::mkappa::KappaOperator;

/// Lattice `(along, across)` on which containment in the superlevel set is tested.
pub const CONTAINMENT_LATTICE: (usize, usize) = (64, 8);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum SelectionEvent {
    Select { id: RectId },
    /// `id` was removed right after `after` was selected.
    Discard { id: RectId, after: RectId },
}

/// The decisions of the greedy selection, in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionLog {
    pub kappa: u32,
    pub events: Vec<SelectionEvent>,
}

impl SelectionLog {
    /// One decision per line: `kappa <κ>`, then `select <id>` or `discard <id> <after>`.
    pub fn to_text(&self) -> String {
        let mut out = format!("kappa {}\n", self.kappa);
        for e in &self.events {
            match e {
                SelectionEvent::Select { id } => writeln!(out, "select {id}").unwrap(),
                SelectionEvent::Discard { id, after } => writeln!(out, "discard {id} {after}").unwrap(),
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kappa = None;
        let mut events = Vec::new();
        let num = |t: Option<&str>, n: usize| -> Result<u32> {
            t.ok_or_else(|| Error::Format(format!("line {n}: missing field")))?
                .parse()
                .map_err(|e| Error::Format(format!("line {n}: {e}")))
        };
        for (k, line) in text.lines().enumerate() {
            let n = k + 1;
            let mut it = line.split_whitespace();
            match it.next() {
                None => continue,
                Some("kappa") if kappa.is_none() && events.is_empty() => kappa = Some(num(it.next(), n)?),
                Some("select") => events.push(SelectionEvent::Select { id: RectId(num(it.next(), n)?) }),
                Some("discard") => {
                    let id = RectId(num(it.next(), n)?);
                    let after = RectId(num(it.next(), n)?);
                    events.push(SelectionEvent::Discard { id, after });
                }
                Some(other) => return Err(Error::Format(format!("line {n}: unexpected `{other}`"))),
            }
            if it.next().is_some() {
                return Err(Error::Format(format!("line {n}: trailing fields")));
            }
        }
        let kappa = kappa.ok_or_else(|| Error::Format("missing kappa line".into()))?;
        Ok(SelectionLog { kappa, events })
    }
}

/// Output of the selection and of the pair classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringResult {
    pub kappa: u32,
    /// `𝓡′` in selection order.
    pub selected: Vec<RectId>,
    /// `𝓡″` in removal order.
    pub discarded: Vec<RectId>,
    /// `(ρ, R)` with `ρ` selected before `R` and `ρ ∩ R ≠ ∅`.
    pub pairs: Vec<(RectId, RectId)>,
    /// `S_R`: the `ρ` of pairs with `EX(ρ) ⊂ 10·EX(R)`.
    pub s_r: BTreeMap<RectId, Vec<RectId>>,
    /// `𝒯_ρ`: the `R` of the remaining pairs.
    pub t_rho: BTreeMap<RectId, Vec<RectId>>,
    pub diagnostics: BTreeMap<String, f64>,
    pub log: SelectionLog,
}

/// Selection priority: longer first, then smaller `|EX|`, then smaller id.
pub fn priority(a: &Rect, b: &Rect) -> Ordering {
    b.len()
        .total_cmp(&a.len())
        .then(a.ex_len().total_cmp(&b.ex_len()))
        .then(a.id.cmp(&b.id))
}

/// Test points of `r`, in the order they are checked.
pub fn containment_points(r: &Rect) -> Vec<Point> {
    let (nu, nw) = CONTAINMENT_LATTICE;
    lattice(nu, nw).into_iter().map(|(u, w)| r.from_local(u * r.len(), w * r.wid())).collect()
}

/// Per stock rectangle: the first test point not yet known to lie in the
/// superlevel set, with its term sums over every selected rectangle so far.
struct Sentinel {
    points: Vec<Point>,
    next: usize,
    sums: Vec<f64>,
}

enum Fresh {
    Inside,
    Outside(Vec<f64>),
}

fn evaluate_fresh(op: &KappaOperator, x: Point, bigs: &[Rect]) -> Fresh {
    let mut sums = vec![0.0; op.n_terms()];
    // Shortcut, see `KappaOperator::reaches`.
    if let Some(k) = KappaOperator::nearest(x, bigs) {
        if op.accumulate(x, &bigs[k], &mut sums) {
            return Fresh::Inside;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
    }
    for b in bigs {
        if op.accumulate(x, b, &mut sums) {
            return Fresh::Inside;
        }
    }
    Fresh::Outside(sums)
}

impl Sentinel {
    /// Advances past test points in the superlevel set; true when none remain.
    fn advance(&mut self, op: &KappaOperator, bigs: &[Rect]) -> bool {
        while self.next < self.points.len() {
            match evaluate_fresh(op, self.points[self.next], bigs) {
                Fresh::Inside => self.next += 1,
                Fresh::Outside(sums) => {
                    self.sums = sums;
                    return false;
                }
            }
        }
        true
    }
}

/// Greedy selection of `𝓡′`: repeatedly select the top-priority rectangle of
/// the stock, then discard every stock rectangle whose test lattice lies in
/// `{M_κ Σ_{selected} 𝟏_{κR} ≥ κ⁻¹}`.
pub fn select_covering(fam: &RectFamily, kappa: u32) -> Result<CoveringResult> {
    let op = KappaOperator::for_family(fam.rects(), kappa)?;
    let k = kappa as f64;
    let mut order: Vec<&Rect> = fam.rects().iter().collect();
    order.sort_by(|a, b| priority(a, b));
    let mut alive = vec![true; order.len()];
    let mut sentinels: Vec<Option<Sentinel>> = order.iter().map(|_| None).collect();
    let mut bigs: Vec<Rect> = Vec::new();
    let mut selected = Vec::new();
    let mut discarded = Vec::new();
    let mut events = Vec::new();
    let mut cursor = 0;
    loop {
        while cursor < order.len() && !alive[cursor] {
            cursor += 1;
        }
        if cursor == order.len() {
            break;
        }
        let r = order[cursor];
        alive[cursor] = false;
        selected.push(r.id);
        events.push(SelectionEvent::Select { id: r.id });
        let big = r.dilate(k)?;
        bigs.push(big);
        for j in cursor + 1..order.len() {
            if !alive[j] {
                continue;
            }
            let done = match &mut sentinels[j] {
                Some(s) => {
                    let x = s.points[s.next];
                    if op.accumulate(x, &big, &mut s.sums) {
                        s.next += 1;
                        s.advance(&op, &bigs)
                    } else {
                        false
                    }
                }
                slot @ None => {
                    let mut s = Sentinel { points: containment_points(order[j]), next: 0, sums: Vec::new() };
                    let done = s.advance(&op, &bigs);
                    *slot = Some(s);
                    done
                }
            };
            if done {
                alive[j] = false;
                sentinels[j] = None;
                discarded.push(order[j].id);
                events.push(SelectionEvent::Discard { id: order[j].id, after: r.id });
            }
        }
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("kappa_scales".to_string(), op.scales().len() as f64);
    diagnostics.insert("selected".to_string(), selected.len() as f64);
    diagnostics.insert("discarded".to_string(), discarded.len() as f64);
    Ok(CoveringResult {
        kappa,
        selected,
        discarded,
        pairs: Vec::new(),
        s_r: BTreeMap::new(),
        t_rho: BTreeMap::new(),
        diagnostics,
        log: SelectionLog { kappa, events },
    })
}

/// Outcome of replaying a selection log against a family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub selections: usize,
    pub discards: usize,
    pub failures: Vec<String>,
}

impl ReplayReport {
    pub fn is_consistent(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-checks every logged decision with full `M_κ` evaluation: each id is
/// decided once, each selection is the top-priority survivor and not itself
/// absorbed, and each discarded rectangle lies in the superlevel set of the
/// rectangles selected up to its removal.
pub fn replay_selection_log(log: &SelectionLog, fam: &RectFamily) -> Result<ReplayReport> {
    let op = KappaOperator::for_family(fam.rects(), log.kappa)?;
    let k = log.kappa as f64;
    let by_id: HashMap<RectId, &Rect> = fam.rects().iter().map(|r| (r.id, r)).collect();
    let mut alive: BTreeMap<RectId, &Rect> = by_id.iter().map(|(&id, &r)| (id, r)).collect();
    let mut bigs: Vec<Rect> = Vec::new();
    let mut last: Option<RectId> = None;
    let mut rep = ReplayReport::default();
    let contained = |r: &Rect, bigs: &[Rect]| {
        containment_points(r).into_iter().all(|x| op.value(x, bigs) >= op.threshold())
    };
    for e in &log.events {
        match *e {
            SelectionEvent::Select { id } => {
                rep.selections += 1;
                let Some(r) = alive.remove(&id) else {
                    rep.failures.push(format!("select {id}: not in stock"));
                    continue;
                };
                if let Some(better) = alive.values().find(|o| priority(o, r) == Ordering::Less) {
                    rep.failures.push(format!("select {id}: {} has priority", better.id));
                }
                if !bigs.is_empty() && contained(r, &bigs) {
                    rep.failures.push(format!("select {id}: already in the superlevel set"));
                }
                bigs.push(r.dilate(k)?);
                last = Some(id);
            }
            SelectionEvent::Discard { id, after } => {
                rep.discards += 1;
                if last != Some(after) {
                    rep.failures.push(format!("discard {id}: logged after {after}, last selection is {last:?}"));
                }
                let Some(r) = alive.remove(&id) else {
                    rep.failures.push(format!("discard {id}: not in stock"));
                    continue;
                };
                if !contained(r, &bigs) {
                    rep.failures.push(format!("discard {id}: not in the superlevel set"));
                }
            }
        }
    }
    if !alive.is_empty() {
        rep.failures.push(format!("{} rectangles never decided", alive.len()));
    }
    Ok(rep)
}
