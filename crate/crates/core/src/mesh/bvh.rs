//! Bounding volume hierarchy over mesh triangles: median split on the longest
//! axis, at most four triangles per leaf.

use crate::geom::{vec3, Vec3};

use super::{tri, Aabb, TriMesh};

pub const MAX_LEAF_TRIANGLES: usize = 4;

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    aabb: Aabb,
    kind: NodeKind,
}

#[derive(Debug, Clone, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Triangle indices, permuted so each leaf owns a contiguous range.
    order: Vec<u32>,
}

fn triangle_aabb(mesh: &TriMesh, i: usize) -> Aabb {
    Aabb::from_points(mesh.triangle(i))
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Bvh {
        let n = mesh.triangle_count();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * n.max(1) / MAX_LEAF_TRIANGLES + 1),
            order: (0..n as u32).collect(),
        };
        if n == 0 {
            return bvh;
        }
        let boxes: Vec<Aabb> = (0..n).map(|i| triangle_aabb(mesh, i)).collect();
        let centroids: Vec<Vec3> = boxes.iter().map(|b| b.center()).collect();
        bvh.build_node(&boxes, &centroids, 0, n);
        bvh
    }

    fn build_node(&mut self, boxes: &[Aabb], centroids: &[Vec3], start: usize, end: usize) -> u32 {
        let aabb = self.order[start..end]
            .iter()
            .fold(Aabb::EMPTY, |b, &t| b.union(boxes[t as usize]));
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            aabb,
            kind: NodeKind::Leaf {
                start: start as u32,
                count: (end - start) as u32,
            },
        });
        if end - start <= MAX_LEAF_TRIANGLES {
            return id;
        }
        let axis = aabb.longest_axis();
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let left = self.build_node(boxes, centroids, start, mid);
        let right = self.build_node(boxes, centroids, mid, end);
        self.nodes[id as usize].kind = NodeKind::Inner { left, right };
        id
    }

    pub fn root_aabb(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| n.aabb)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn leaf_triangles(&self, start: u32, count: u32) -> &[u32] {
        &self.order[start as usize..(start + count) as usize]
    }

    /// Checks the structural invariants: leaves contain their triangles and
    /// child boxes lie inside parent boxes.
    pub fn validate(&self, mesh: &TriMesh) -> bool {
        let inside = |outer: &Aabb, inner: &Aabb| {
            outer.contains(inner.min) && outer.contains(inner.max)
        };
        self.nodes.iter().all(|node| match node.kind {
            NodeKind::Leaf { start, count } => self
                .leaf_triangles(start, count)
                .iter()
                .all(|&t| inside(&node.aabb, &triangle_aabb(mesh, t as usize))),
            NodeKind::Inner { left, right } => {
                inside(&node.aabb, &self.nodes[left as usize].aabb)
                    && inside(&node.aabb, &self.nodes[right as usize].aabb)
            }
        })
    }

    pub fn ray_nearest(&self, mesh: &TriMesh, origin: Vec3, dir: Vec3, tmax: f64) -> Option<(f64, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = vec3(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(f64, usize)> = None;
        let mut limit = tmax;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.aabb.ray_entry(origin, inv, limit).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &t in self.leaf_triangles(start, count) {
                        let t = t as usize;
                        if let Some(d) = tri::ray_triangle(origin, dir, &mesh.triangle(t)) {
                            let better = match best {
                                None => true,
                                Some((bd, bt)) => d < bd || (d == bd && t < bt),
                            };
                            if d > 0.0 && d <= limit && better {
                                best = Some((d, t));
                                limit = d;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }

    /// Number of triangles the ray from `origin` along `dir` crosses at t > 0.
    pub fn count_crossings(&self, mesh: &TriMesh, origin: Vec3, dir: Vec3) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        let inv = vec3(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut count = 0;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.aabb.ray_entry(origin, inv, f64::INFINITY).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count: c } => {
                    count += self
                        .leaf_triangles(start, c)
                        .iter()
                        .filter(|&&t| {
                            matches!(tri::ray_triangle(origin, dir, &mesh.triangle(t as usize)), Some(d) if d > 0.0)
                        })
                        .count();
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        count
    }

    pub fn any_within(&self, mesh: &TriMesh, p: Vec3, tol: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let tol2 = tol * tol;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.aabb.distance_squared(p) > tol2 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    if self
                        .leaf_triangles(start, count)
                        .iter()
                        .any(|&t| tri::point_distance(p, &mesh.triangle(t as usize)) <= tol)
                    {
                        return true;
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }

    pub fn closest_distance(&self, mesh: &TriMesh, p: Vec3) -> f64 {
        let mut best = f64::INFINITY;
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.aabb.distance_squared(p) >= best * best {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &t in self.leaf_triangles(start, count) {
                        best = best.min(tri::point_distance(p, &mesh.triangle(t as usize)));
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left as usize].aabb.distance_squared(p);
                    let dr = self.nodes[right as usize].aabb.distance_squared(p);
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }

    /// Visits pairs of triangles from the two trees whose leaf boxes overlap,
    /// stopping as soon as `visit` returns true.
    pub fn any_overlapping_pair<F>(&self, other: &Bvh, mut visit: F) -> bool
    where
        F: FnMut(usize, usize) -> bool,
    {
        if self.nodes.is_empty() || other.nodes.is_empty() {
            return false;
        }
        let mut stack = vec![(0u32, 0u32)];
        while let Some((a, b)) = stack.pop() {
            let na = &self.nodes[a as usize];
            let nb = &other.nodes[b as usize];
            if !na.aabb.overlaps(&nb.aabb) {
                continue;
            }
            match (na.kind, nb.kind) {
                (NodeKind::Leaf { start: sa, count: ca }, NodeKind::Leaf { start: sb, count: cb }) => {
                    for &ta in self.leaf_triangles(sa, ca) {
                        for &tb in other.leaf_triangles(sb, cb) {
                            if visit(ta as usize, tb as usize) {
                                return true;
                            }
                        }
                    }
                }
                (NodeKind::Inner { left, right }, NodeKind::Leaf { .. }) => {
                    stack.push((right, b));
                    stack.push((left, b));
                }
                (NodeKind::Leaf { .. }, NodeKind::Inner { left, right }) => {
                    stack.push((a, right));
                    stack.push((a, left));
                }
                (NodeKind::Inner { left: la, right: ra }, NodeKind::Inner { left: lb, right: rb }) => {
                    // Descend the larger box first.
                    let va = na.aabb.extent();
                    let vb = nb.aabb.extent();
                    if va.x * va.y * va.z >= vb.x * vb.y * vb.z {
                        stack.push((ra, b));
                        stack.push((la, b));
                    } else {
                        stack.push((a, rb));
                        stack.push((a, lb));
                    }
                }
            }
        }
        false
    }
}
