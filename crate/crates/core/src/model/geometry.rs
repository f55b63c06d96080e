use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::game::{argmax, FiniteCheapTalkGame};
use crate::model::payoff::PayoffProfile;
use crate::model::strategy::ReceiverStrategy;

/// Tolerance for geometric predicates.
pub const GEOM_TOL: f64 = 1e-9;

/// One point of the weighted-sum frontier, with the Sender at τ.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub weight: f64,
    pub payoff: PayoffProfile,
    pub receiver: ReceiverStrategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    /// Counter-clockwise, starting from the lowest (then leftmost) vertex.
    pub hull_vertices: Vec<PayoffProfile>,
    pub pareto_frontier: Vec<FrontierPoint>,
}

type Pt = (f64, f64);

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain. Output is counter-clockwise without collinear
/// points, starting at the lowest-then-leftmost point. Degenerate inputs
/// give one or two vertices.
pub fn convex_hull(points: &[PayoffProfile]) -> Vec<PayoffProfile> {
    let mut pts: Vec<Pt> = points.iter().map(|p| (p.sender, p.receiver)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-15 && (a.1 - b.1).abs() <= 1e-15);
    if pts.len() <= 2 {
        return rotate_to_bottom(pts);
    }
    let mut hull: Vec<Pt> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Pt>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    rotate_to_bottom(hull)
}

fn rotate_to_bottom(mut pts: Vec<Pt>) -> Vec<PayoffProfile> {
    if let Some(start) = (0..pts.len()).min_by(|&i, &j| {
        let (a, b) = (pts[i], pts[j]);
        (a.1, a.0).partial_cmp(&(b.1, b.0)).expect("finite coordinates")
    }) {
        pts.rotate_left(start);
    }
    pts.into_iter().map(|(x, y)| PayoffProfile::new(x, y)).collect()
}

fn edge_angle(from: &PayoffProfile, to: &PayoffProfile) -> f64 {
    let a = (to.receiver - from.receiver).atan2(to.sender - from.sender);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Minkowski sum of two convex polygons given counter-clockwise from their
/// lowest vertex (as returned by [`convex_hull`]), by merging edges in angle
/// order.
pub fn minkowski_sum(p: &[PayoffProfile], q: &[PayoffProfile]) -> Vec<PayoffProfile> {
    if p.is_empty() {
        return q.to_vec();
    }
    if q.is_empty() {
        return p.to_vec();
    }
    let edges = |poly: &[PayoffProfile]| -> Vec<(f64, PayoffProfile)> {
        let n = poly.len();
        if n == 1 {
            return Vec::new();
        }
        (0..n)
            .map(|i| {
                let (a, b) = (&poly[i], &poly[(i + 1) % n]);
                (edge_angle(a, b), PayoffProfile::new(b.sender - a.sender, b.receiver - a.receiver))
            })
            .collect()
    };
    let (ep, eq) = (edges(p), edges(q));
    let mut current = PayoffProfile::new(p[0].sender + q[0].sender, p[0].receiver + q[0].receiver);
    let mut out = vec![current];
    let (mut i, mut j) = (0, 0);
    while i < ep.len() || j < eq.len() {
        let take_p = j >= eq.len() || (i < ep.len() && ep[i].0 <= eq[j].0);
        let step = if take_p {
            i += 1;
            ep[i - 1].1
        } else {
            j += 1;
            eq[j - 1].1
        };
        current = PayoffProfile::new(current.sender + step.sender, current.receiver + step.receiver);
        out.push(current);
    }
    // Clean up collinear runs and the closing duplicate.
    convex_hull(&out)
}

/// Point-in-convex-polygon test with tolerance; handles point and segment
/// degeneracies.
pub fn contains(hull: &[PayoffProfile], point: PayoffProfile, tol: f64) -> bool {
    let p = (point.sender, point.receiver);
    match hull.len() {
        0 => false,
        1 => hull[0].max_abs_diff(point) <= tol,
        2 => distance_to_segment(p, pt(&hull[0]), pt(&hull[1])) <= tol,
        n => (0..n).all(|i| {
            let (a, b) = (pt(&hull[i]), pt(&hull[(i + 1) % n]));
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            cross(a, b, p) >= -tol * len
        }),
    }
}

fn pt(p: &PayoffProfile) -> Pt {
    (p.sender, p.receiver)
}

fn distance_to_segment(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

/// Feasible payoff polygon: Minkowski sum over states of the prior-scaled
/// per-state action hulls.
pub fn feasible_hull(game: &FiniteCheapTalkGame) -> Vec<PayoffProfile> {
    let mut acc: Vec<PayoffProfile> = Vec::new();
    for s in 0..game.num_states() {
        let mu = game.prior()[s];
        let pts: Vec<PayoffProfile> = (0..game.num_actions())
            .map(|a| PayoffProfile::new(mu * game.u_sender(s, a), mu * game.u_receiver(s, a)))
            .collect();
        let hull = convex_hull(&pts);
        acc = if acc.is_empty() { hull } else { minkowski_sum(&acc, &hull) };
    }
    acc
}

/// The frontier point for one weight: per-state maximizer of
/// `λ u_S + (1-λ) u_R`, lowest action index on ties.
pub fn weighted_optimum(game: &FiniteCheapTalkGame, weight: f64) -> FrontierPoint {
    let choices: Vec<usize> = (0..game.num_states())
        .map(|s| {
            argmax(
                (0..game.num_actions())
                    .map(|a| weight * game.u_sender(s, a) + (1.0 - weight) * game.u_receiver(s, a)),
            )
        })
        .collect();
    let mut payoff = PayoffProfile::new(0.0, 0.0);
    for (s, &a) in choices.iter().enumerate() {
        payoff.sender += game.prior()[s] * game.u_sender(s, a);
        payoff.receiver += game.prior()[s] * game.u_receiver(s, a);
    }
    FrontierPoint {
        weight,
        payoff,
        receiver: ReceiverStrategy::pure(game, &choices).expect("argmax indices are valid"),
    }
}

pub fn feasible_set(game: &FiniteCheapTalkGame, weight_grid_size: usize) -> Result<FeasibleSet> {
    feasible_set_with(game, weight_grid_size, Exec::default())
}

pub fn feasible_set_with(game: &FiniteCheapTalkGame, weight_grid_size: usize, exec: Exec) -> Result<FeasibleSet> {
    if weight_grid_size == 0 {
        return Err(Error::invalid_at("weight grid size must be positive", "weightGridSize"));
    }
    let denom = (weight_grid_size.max(2) - 1) as f64;
    let pareto_frontier = exec.map(weight_grid_size, |i| weighted_optimum(game, i as f64 / denom));
    Ok(FeasibleSet { hull_vertices: feasible_hull(game), pareto_frontier })
}

impl FeasibleSet {
    pub fn contains(&self, point: PayoffProfile, tol: f64) -> bool {
        contains(&self.hull_vertices, point, tol)
    }

    /// Hull vertices on the weakly efficient boundary, ordered from the
    /// Receiver-optimal vertex to the Sender-optimal vertex.
    pub fn efficient_chain(&self) -> Vec<PayoffProfile> {
        efficient_chain(&self.hull_vertices)
    }
}

pub fn efficient_chain(hull: &[PayoffProfile]) -> Vec<PayoffProfile> {
    let n = hull.len();
    if n == 0 {
        return Vec::new();
    }
    let pick = |key: fn(&PayoffProfile) -> (f64, f64)| {
        (0..n)
            .max_by(|&i, &j| key(&hull[i]).partial_cmp(&key(&hull[j])).expect("finite coordinates"))
            .expect("non-empty hull")
    };
    let receiver_best = pick(|p| (p.receiver, p.sender));
    let sender_best = pick(|p| (p.sender, p.receiver));
    let mut chain = vec![hull[sender_best]];
    let mut i = sender_best;
    while i != receiver_best {
        i = (i + 1) % n;
        chain.push(hull[i]);
    }
    chain.reverse();
    chain
}

/// Point at normalized arc length `t ∈ [0, 1]` along a polyline
/// (`t = 0` is the first vertex).
pub fn point_along(chain: &[PayoffProfile], t: f64) -> PayoffProfile {
    assert!(!chain.is_empty(), "empty chain");
    let lengths: Vec<f64> = chain
        .windows(2)
        .map(|w| ((w[1].sender - w[0].sender).powi(2) + (w[1].receiver - w[0].receiver).powi(2)).sqrt())
        .collect();
    let total: f64 = lengths.iter().sum();
    if total == 0.0 {
        return chain[0];
    }
    let mut remaining = t.clamp(0.0, 1.0) * total;
    for (k, &len) in lengths.iter().enumerate() {
        if remaining <= len || k + 1 == lengths.len() {
            let frac = if len == 0.0 { 0.0 } else { (remaining / len).min(1.0) };
            return chain[k].lerp(chain[k + 1], frac);
        }
        remaining -= len;
    }
    *chain.last().expect("non-empty chain")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::make_binary;

    fn pp(x: f64, y: f64) -> PayoffProfile {
        PayoffProfile::new(x, y)
    }

    fn same_polygon(a: &[PayoffProfile], b: &[PayoffProfile], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.max_abs_diff(*q) <= tol)
    }

    #[test]
    fn binary_hull_vertices() {
        let g = make_binary(2.0 / 3.0).unwrap();
        let hull = feasible_hull(&g);
        let expected = [pp(2.0 / 3.0, 0.0), pp(1.0, 1.0 / 3.0), pp(1.0 / 3.0, 1.0), pp(0.0, 2.0 / 3.0)];
        assert!(same_polygon(&hull, &expected, 1e-12), "{hull:?}");
    }

    #[test]
    fn single_state_like_hull() {
        let pts = [pp(0.0, 0.0), pp(1.0, 0.0), pp(0.5, 0.2), pp(0.0, 1.0), pp(0.5, 0.5)];
        let hull = convex_hull(&pts);
        assert!(same_polygon(&hull, &[pp(0.0, 0.0), pp(1.0, 0.0), pp(0.0, 1.0)], 0.0));
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[pp(1.0, 1.0), pp(1.0, 1.0)]).len(), 1);
        let seg = convex_hull(&[pp(0.0, 0.0), pp(1.0, 1.0), pp(0.5, 0.5)]);
        assert_eq!(seg.len(), 2);
        assert!(contains(&seg, pp(0.25, 0.25), GEOM_TOL));
        assert!(!contains(&seg, pp(0.25, 0.3), GEOM_TOL));
    }

    #[test]
    fn minkowski_matches_brute_force() {
        let p = convex_hull(&[pp(0.0, 0.0), pp(2.0, 0.0), pp(1.0, 1.5)]);
        let q = convex_hull(&[pp(0.0, 0.0), pp(1.0, 0.0), pp(1.0, 1.0), pp(0.0, 1.0)]);
        let sums: Vec<PayoffProfile> =
            p.iter().flat_map(|a| q.iter().map(move |b| pp(a.sender + b.sender, a.receiver + b.receiver))).collect();
        assert!(same_polygon(&minkowski_sum(&p, &q), &convex_hull(&sums), 1e-12));
        // Segment plus point.
        let seg = convex_hull(&[pp(0.0, 0.0), pp(1.0, 0.0)]);
        let dot = vec![pp(3.0, 4.0)];
        assert!(same_polygon(&minkowski_sum(&seg, &dot), &[pp(3.0, 4.0), pp(4.0, 4.0)], 0.0));
    }

    #[test]
    fn frontier_points_on_hull_and_efficient() {
        let g = make_binary(0.7).unwrap();
        let fs = feasible_set(&g, 21).unwrap();
        for w in fs.pareto_frontier.windows(2) {
            assert!(w[1].payoff.receiver <= w[0].payoff.receiver + 1e-12);
        }
        for f in &fs.pareto_frontier {
            assert!(fs.contains(f.payoff, GEOM_TOL));
            let obj = |p: &PayoffProfile| f.weight * p.sender + (1.0 - f.weight) * p.receiver;
            let best = fs.hull_vertices.iter().map(obj).fold(f64::NEG_INFINITY, f64::max);
            assert!((obj(&f.payoff) - best).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_and_arc_length() {
        let g = make_binary(2.0 / 3.0).unwrap();
        let chain = feasible_set(&g, 2).unwrap().efficient_chain();
        assert!(same_polygon(&chain, &[pp(1.0 / 3.0, 1.0), pp(1.0, 1.0 / 3.0)], 1e-12));
        let mid = point_along(&chain, 0.5);
        assert!(mid.max_abs_diff(pp(2.0 / 3.0, 2.0 / 3.0)) < 1e-12);
        assert!(point_along(&[pp(1.0, 2.0)], 0.3) == pp(1.0, 2.0));
    }

    #[test]
    fn containment_tolerance() {
        let g = make_binary(2.0 / 3.0).unwrap();
        let hull = feasible_hull(&g);
        assert!(contains(&hull, pp(0.5, 5.0 / 6.0), GEOM_TOL));
        assert!(!contains(&hull, pp(0.5, 5.0 / 6.0 + 1e-6), GEOM_TOL));
        assert!(!contains(&hull, pp(-0.01, 0.5), GEOM_TOL));
    }
}
