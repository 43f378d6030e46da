use rand::Rng;

use super::{Edge, Pairing, Stage, UnpairedStub};
use crate::coloring::{sample_constrained_coloring, ColoringConstraints};
use crate::degrees::MarkedPointSet;
use crate::geometry::SimDomain;
use crate::matching::stable_match_indices;
use crate::scalar::Scalar;

/// Repeated stable matching with colouring.
///
/// Level 1 is the stable matching of all points with a stub. At level `i`
/// the points with degree at least `i` receive a random `i`-colouring in
/// which any two points already joined at a lower level differ, and each
/// colour class is stable-matched on its own. Distinct classes rule out
/// repeated vertex pairs.
pub fn rsmc<T: Scalar, R: Rng + ?Sized>(
    domain: &SimDomain<T>,
    marked: &MarkedPointSet<T>,
    rng: &mut R,
) -> Pairing {
    let points = marked.points();
    let n = marked.len();
    let mut pairing = Pairing::default();
    // pairs joined at earlier levels whose endpoints are both still present
    let mut joined: Vec<(usize, usize)> = Vec::new();
    let mut local = vec![usize::MAX; n];

    for level in 1..=marked.max_degree() {
        let members: Vec<usize> = (0..n).filter(|&x| marked.degree(x) >= level).collect();
        joined.retain(|&(a, b)| marked.degree(a) >= level && marked.degree(b) >= level);

        let classes: Vec<Vec<usize>> = if level == 1 {
            vec![members.clone()]
        } else {
            for (k, &x) in members.iter().enumerate() {
                local[x] = k;
            }
            let constraints = ColoringConstraints::new(
                members.len(),
                joined.iter().map(|&(a, b)| (local[a], local[b])).collect(),
                level,
            );
            // each member met at most one partner per lower level, so level - 1 constraints at most
            let colors = sample_constrained_coloring(&constraints, rng)
                .expect("constraint degree stays below the colour count");
            let mut classes = vec![Vec::new(); level as usize];
            for (k, &x) in members.iter().enumerate() {
                classes[colors[k] as usize - 1].push(x);
            }
            classes
        };

        for class in &classes {
            let (pairs, left) = stable_match_indices(domain, points, class);
            pairing
                .edges
                .extend(pairs.iter().map(|&(a, b)| Edge::new(a, b, level, Stage::Stable)));
            pairing
                .unpaired
                .extend(left.into_iter().map(|point| UnpairedStub { point, level }));
            joined.extend(pairs);
        }
    }
    pairing
}
