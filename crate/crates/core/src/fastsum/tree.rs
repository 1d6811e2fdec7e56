use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Barnes–Hut parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig<T> {
    pub leaf_size: usize,
    /// A cell is summarized when `cell diameter / distance < opening_angle`.
    pub opening_angle: T,
}

impl<T: Scalar> Default for TreeConfig<T> {
    fn default() -> Self {
        Self {
            leaf_size: 8,
            opening_angle: T::lit(0.5),
        }
    }
}

#[derive(Debug, Clone)]
struct Node<T> {
    start: usize,
    end: usize,
    center: [T; 3],
    diameter: T,
    children: Option<(usize, usize)>,
}

struct KdTree<T> {
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> KdTree<T> {
    fn build(points: &[T], dim: usize, leaf_size: usize) -> Self {
        let n = points.len() / dim;
        let mut tree = Self {
            dim,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        tree.split(points, 0, n, leaf_size);
        tree
    }

    fn coord(points: &[T], dim: usize, idx: usize, d: usize) -> T {
        points[idx * dim + d]
    }

    fn split(&mut self, points: &[T], start: usize, end: usize, leaf_size: usize) -> usize {
        let dim = self.dim;
        let mut lo = [T::infinity(); 3];
        let mut hi = [T::neg_infinity(); 3];
        let mut center = [T::zero(); 3];
        for &p in &self.order[start..end] {
            for d in 0..dim {
                let v = Self::coord(points, dim, p, d);
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
                center[d] = center[d] + v;
            }
        }
        let count = T::from_count(end - start);
        let mut diameter = T::zero();
        let mut widest = 0;
        for d in 0..dim {
            center[d] = center[d] / count;
            let w = hi[d] - lo[d];
            diameter = diameter + w * w;
            if w > hi[widest] - lo[widest] {
                widest = d;
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            center,
            diameter: diameter.sqrt(),
            children: None,
        });
        if end - start > leaf_size && hi[widest] > lo[widest] {
            let mid = start + (end - start) / 2;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                Self::coord(points, dim, a, widest)
                    .partial_cmp(&Self::coord(points, dim, b, widest))
                    .expect("finite coordinates")
            });
            let left = self.split(points, start, mid, leaf_size);
            let right = self.split(points, mid, end, leaf_size);
            self.nodes[id].children = Some((left, right));
        }
        id
    }
}

fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Approximate Gaussian potentials `v_i ≈ Σ_j exp(−precision·|z_i − z_j|²) x_j`
/// for scattered sites via a single-tree Barnes–Hut traversal with monopole
/// (cell-average) summaries.
///
/// `points` is a flat `n × dim` coordinate array, `dim ∈ {1, 2, 3}`. The
/// result converges to the dense sum as `opening_angle → 0`. If every point
/// coincides the dense sum is used directly.
pub fn sum_tree<T: Scalar>(points: &[T], dim: usize, precision: T, x: &[T], cfg: &TreeConfig<T>) -> Result<Vec<T>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::config(format!("tree dimension {dim} not in 1..=3")));
    }
    let n = x.len();
    check_len("point coordinates", points.len(), n * dim)?;
    if cfg.leaf_size == 0 {
        return Err(Error::config("leaf_size must be at least 1"));
    }
    if !(cfg.opening_angle > T::zero() && cfg.opening_angle <= T::one()) {
        return Err(Error::config("opening_angle must lie in (0, 1]"));
    }
    if precision < T::zero() {
        return Err(Error::config("kernel precision must be nonnegative"));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("point coordinates must be finite"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let kernel = |r2: T| (-precision * r2).exp();
    let tree = KdTree::build(points, dim, cfg.leaf_size);
    if tree.nodes[0].diameter == T::zero() {
        let total: T = x.iter().copied().sum();
        return Ok(vec![kernel(T::zero()) * total; n]);
    }

    // children always follow their parent, so a reverse sweep aggregates
    let mut weight = vec![T::zero(); tree.nodes.len()];
    for (id, node) in tree.nodes.iter().enumerate().rev() {
        weight[id] = match node.children {
            Some((l, r)) => weight[l] + weight[r],
            None => tree.order[node.start..node.end].iter().map(|&j| x[j]).sum(),
        };
    }

    let theta2 = cfg.opening_angle * cfg.opening_angle;
    let mut stack = Vec::with_capacity(64);
    let out = (0..n)
        .map(|i| {
            let zi = &points[i * dim..(i + 1) * dim];
            let mut acc = T::zero();
            stack.clear();
            stack.push(0usize);
            while let Some(id) = stack.pop() {
                let node = &tree.nodes[id];
                match node.children {
                    None => {
                        for &j in &tree.order[node.start..node.end] {
                            acc = acc + kernel(dist2(zi, &points[j * dim..(j + 1) * dim])) * x[j];
                        }
                    }
                    Some((l, r)) => {
                        let d2 = dist2(zi, &node.center[..dim]);
                        if d2 > T::zero() && node.diameter * node.diameter < theta2 * d2 {
                            acc = acc + kernel(d2) * weight[id];
                        } else {
                            stack.push(r);
                            stack.push(l);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Ok(out)
}
