//! Slow references for the covering algorithms: no caching, no early exits
//! inside `M_κ`, plain quadratic scans.

#![allow(dead_code)]

use kakeya_core::covering::{
    containment_points, segment_term, square_term, KappaOperator, SelectionEvent, SelectionLog, UDecomposition,
};
use kakeya_core::geometry::{Point, Rect, RectId};
use kakeya_core::maximal::RectFamily;
use kakeya_core::vectorfield::CellSet;

/// `M_κ(Σ 𝟏_big)(x)`: every term summed over every rectangle in order, then
/// divided and maximized.
pub fn mkappa_value(op: &KappaOperator, x: Point, bigs: &[Rect]) -> f64 {
    let mut best: f64 = 0.0;
    for &s in op.scales() {
        let mut sq = 0.0;
        for b in bigs {
            sq += square_term(x, s, b);
        }
        best = best.max(sq / (s * s));
        for &w in op.directions() {
            let mut seg = 0.0;
            for b in bigs {
                seg += segment_term(x, w, s, b);
            }
            best = best.max(seg / (2.0 * s));
        }
    }
    best
}

fn before(a: &Rect, b: &Rect) -> bool {
    if a.len() != b.len() {
        return a.len() > b.len();
    }
    if a.ex_len() != b.ex_len() {
        return a.ex_len() < b.ex_len();
    }
    a.id < b.id
}

/// The greedy selection, rechecking every stock rectangle from scratch after
/// each selection.
pub fn slow_select(fam: &RectFamily, kappa: u32) -> SelectionLog {
    let op = KappaOperator::for_family(fam.rects(), kappa).unwrap();
    let thresh = 1.0 / kappa as f64;
    let mut stock: Vec<Rect> = fam.rects().to_vec();
    let mut bigs = Vec::new();
    let mut events = Vec::new();
    while !stock.is_empty() {
        let mut best = 0;
        for k in 1..stock.len() {
            if before(&stock[k], &stock[best]) {
                best = k;
            }
        }
        let r = stock.remove(best);
        events.push(SelectionEvent::Select { id: r.id });
        bigs.push(r.dilate(kappa as f64).unwrap());
        let mut gone: Vec<Rect> = stock
            .iter()
            .filter(|c| containment_points(c).into_iter().all(|x| mkappa_value(&op, x, &bigs) >= thresh))
            .copied()
            .collect();
        gone.sort_by(|a, b| if before(a, b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
        for g in &gone {
            events.push(SelectionEvent::Discard { id: g.id, after: r.id });
        }
        stock.retain(|c| !gone.iter().any(|g| g.id == c.id));
    }
    SelectionLog { kappa, events }
}

/// Cell-membership bitmap of a projected density set.
fn bitmap(c: &CellSet) -> Vec<bool> {
    let mut bits = vec![false; c.ncells as usize + 1];
    for &(a, b) in c.runs() {
        for k in a..=b {
            bits[k as usize] = true;
        }
    }
    bits
}

/// Grouping of a decomposition's rectangles by the full overlap matrix.
pub fn quadratic_groups(ud: &UDecomposition) -> Vec<(RectId, Vec<RectId>)> {
    let n = ud.rects.len();
    let maps: Vec<Vec<bool>> = ud.vsets.iter().map(bitmap).collect();
    let overlap: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| maps[a].iter().zip(&maps[b]).any(|(x, y)| *x && *y)).collect())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ud.rects[b].len().total_cmp(&ud.rects[a].len()).then(ud.rects[a].id.cmp(&ud.rects[b].id)));
    let mut alive = vec![true; n];
    let mut out = Vec::new();
    for &a in &order {
        if !alive[a] {
            continue;
        }
        let mut mem = Vec::new();
        for &b in &order {
            if alive[b] && (a == b || overlap[a][b]) {
                alive[b] = false;
                mem.push(ud.rects[b].id);
            }
        }
        out.push((ud.rects[a].id, mem));
    }
    out
}
