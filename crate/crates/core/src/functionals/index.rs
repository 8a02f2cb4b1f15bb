//! Bounding-volume hierarchy over grains for point-membership queries.

use crate::hypcore::{Point, MAX_DIM};
use crate::process::Grain;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: [f64; MAX_DIM],
    hi: [f64; MAX_DIM],
}

impl Aabb {
    fn empty() -> Self {
        Self { lo: [f64::INFINITY; MAX_DIM], hi: [f64::NEG_INFINITY; MAX_DIM] }
    }

    /// Box of the spatial coordinates of `B(c, r)`: coordinate `i` ranges over
    /// `c_i cosh r -+ sqrt(1 + c_i^2) sinh r`.
    fn of_grain(g: &Grain, d: usize) -> Self {
        let (ch, sh) = (g.cosh_radius(), g.radius.sinh());
        let mut b = Self::empty();
        for (i, &c) in g.center.spatial().iter().enumerate().take(d) {
            let w = (1.0 + c * c).sqrt() * sh;
            // pad by a few ulps so boundary points are not lost
            let pad = 4.0 * f64::EPSILON * (c.abs() * ch + w);
            b.lo[i] = c * ch - w - pad;
            b.hi[i] = c * ch + w + pad;
        }
        b
    }

    fn merge(&mut self, o: &Aabb, d: usize) {
        for i in 0..d {
            self.lo[i] = self.lo[i].min(o.lo[i]);
            self.hi[i] = self.hi[i].max(o.hi[i]);
        }
    }

    #[inline]
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, &v)| v >= self.lo[i] && v <= self.hi[i])
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    // leaves: `start..start + count` into `order`; inner nodes: children at `start`, `start + 1`
    start: usize,
    count: usize,
}

/// Static index answering "which grains contain `x`".
#[derive(Debug, Clone)]
pub struct GrainIndex<'a> {
    grains: &'a [Grain],
    d: usize,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl<'a> GrainIndex<'a> {
    pub fn new(grains: &'a [Grain], d: usize) -> Self {
        let boxes: Vec<Aabb> = grains.iter().map(|g| Aabb::of_grain(g, d)).collect();
        let mut order: Vec<usize> = (0..grains.len()).collect();
        let mut nodes = Vec::with_capacity(2 * grains.len() / LEAF_SIZE + 1);
        if !grains.is_empty() {
            nodes.push(Node { bounds: Aabb::empty(), start: 0, count: 0 });
            build(&mut nodes, 0, &mut order, 0, grains.len(), &boxes, d);
        }
        Self { grains, d, nodes, order }
    }

    pub fn grains(&self) -> &'a [Grain] {
        self.grains
    }

    /// Whether some grain other than `exclude` contains `x`.
    pub fn covered_except(&self, x: &Point, exclude: Option<usize>) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let xs = &x.spatial()[..self.d];
        let mut stack = [0usize; 64];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let node = &self.nodes[stack[top]];
            if !node.bounds.contains(xs) {
                continue;
            }
            if node.count > 0 {
                for &g in &self.order[node.start..node.start + node.count] {
                    if Some(g) != exclude && self.grains[g].contains(x) {
                        return true;
                    }
                }
            } else {
                stack[top] = node.start;
                stack[top + 1] = node.start + 1;
                top += 2;
            }
        }
        false
    }

    pub fn covered(&self, x: &Point) -> bool {
        self.covered_except(x, None)
    }

    /// Number of grains containing `x`.
    pub fn depth(&self, x: &Point) -> usize {
        self.grains.iter().filter(|g| g.contains(x)).count()
    }
}

fn build(nodes: &mut Vec<Node>, at: usize, order: &mut [usize], start: usize, end: usize, boxes: &[Aabb], d: usize) {
    let mut bounds = Aabb::empty();
    for &g in &order[start..end] {
        bounds.merge(&boxes[g], d);
    }
    if end - start <= LEAF_SIZE {
        nodes[at] = Node { bounds, start, count: end - start };
        return;
    }
    // split at the median of box centers along the widest axis
    let centre = |g: usize, i: usize| 0.5 * (boxes[g].lo[i] + boxes[g].hi[i]);
    let axis = (0..d)
        .max_by(|&a, &b| (bounds.hi[a] - bounds.lo[a]).total_cmp(&(bounds.hi[b] - bounds.lo[b])))
        .unwrap_or(0);
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| centre(a, axis).total_cmp(&centre(b, axis)));
    let child = nodes.len();
    nodes.push(Node { bounds: Aabb::empty(), start: 0, count: 0 });
    nodes.push(Node { bounds: Aabb::empty(), start: 0, count: 0 });
    nodes[at] = Node { bounds, start: child, count: 0 };
    build(nodes, child, order, start, mid, boxes, d);
    build(nodes, child + 1, order, mid, end, boxes, d);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypcore::Space;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn agrees_with_linear_scan() {
        for d in [2, 3] {
            let sp = Space::new(d).unwrap();
            let mut rng = stream_rng(3, d as u64);
            let grains: Vec<Grain> = (0..300)
                .map(|_| Grain::new(sp.sample_uniform_ball(&mut rng, 5.0).unwrap(), 1.5 * rng.random::<f64>()))
                .collect();
            let idx = GrainIndex::new(&grains, d);
            for _ in 0..20_000 {
                let x = sp.sample_uniform_ball(&mut rng, 5.5).unwrap();
                let linear = grains.iter().any(|g| g.contains(&x));
                assert_eq!(idx.covered(&x), linear);
                let ex = rng.random_range(0..grains.len());
                let linear_ex = grains.iter().enumerate().any(|(i, g)| i != ex && g.contains(&x));
                assert_eq!(idx.covered_except(&x, Some(ex)), linear_ex);
            }
        }
    }

    #[test]
    fn boxes_contain_grain_boundaries() {
        let sp = Space::new(3).unwrap();
        let mut rng = stream_rng(4, 0);
        for _ in 0..200 {
            let g = Grain::new(sp.sample_uniform_ball(&mut rng, 8.0).unwrap(), 2.0 * rng.random::<f64>());
            let b = Aabb::of_grain(&g, 3);
            for _ in 0..50 {
                let x = sp.sample_sphere(&mut rng, &g.center, g.radius);
                assert!(b.contains(x.spatial()));
            }
        }
    }

    #[test]
    fn empty_index() {
        let idx = GrainIndex::new(&[], 2);
        assert!(!idx.covered(&Point::origin(2)));
    }
}
