//! One-dimensional meshes on the skeleton and their degree-of-freedom maps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Frame, Skeleton, Vec3};
use crate::linalg::gauss_legendre;

/// Polynomial order of a continuous piecewise-polynomial field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    P1,
    P2,
}

impl Order {
    pub fn nodes_per_element(self) -> usize {
        match self {
            Order::P1 => 2,
            Order::P2 => 3,
        }
    }

    /// Shape values and reference derivatives at `ξ ∈ [0, 1]`; node order is
    /// `[start, end]` or `[start, mid, end]`.
    pub fn shape(self, xi: f64) -> ([f64; 3], [f64; 3]) {
        match self {
            Order::P1 => ([1.0 - xi, xi, 0.0], [-1.0, 1.0, 0.0]),
            Order::P2 => (
                [
                    (1.0 - xi) * (1.0 - 2.0 * xi),
                    4.0 * xi * (1.0 - xi),
                    xi * (2.0 * xi - 1.0),
                ],
                [4.0 * xi - 3.0, 4.0 - 8.0 * xi, 4.0 * xi - 1.0],
            ),
        }
    }

    /// Reference coordinate of each local node.
    pub fn local_nodes(self) -> &'static [f64] {
        match self {
            Order::P1 => &[0.0, 1.0],
            Order::P2 => &[0.0, 0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub s: f64,
    pub xi: f64,
    /// Gauss weight times element length.
    pub weight: f64,
    pub frame: Frame,
}

#[derive(Debug, Clone)]
pub struct Element {
    pub arc: usize,
    pub s0: f64,
    pub s1: f64,
    /// Global node ids in local order.
    pub nodes: Vec<usize>,
    /// Two-point Gauss rule (constraints, Gram matrix).
    pub q2: Vec<QuadPoint>,
    /// Four-point Gauss rule (loads, energies).
    pub q4: Vec<QuadPoint>,
}

impl Element {
    pub fn h(&self) -> f64 {
        self.s1 - self.s0
    }
}

/// Which element to use at an abscissa shared by two elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Mesh of the skeleton with a continuous field numbering. Knot abscissae
/// and clamped ends are always element boundaries; all incidences of a knot
/// share one node and clamped nodes carry no unknowns.
#[derive(Debug, Clone)]
pub struct SkeletonMesh {
    skeleton: Arc<Skeleton>,
    order: Order,
    h: f64,
    elements: Vec<Element>,
    /// Element index range and boundary abscissae per arc.
    arc_elements: Vec<std::ops::Range<usize>>,
    arc_breaks: Vec<Vec<f64>>,
    n_vertices: usize,
    /// Global vertex id of each element boundary, per arc.
    arc_vertices: Vec<Vec<usize>>,
    node_location: Vec<(usize, f64)>,
    node_free: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
    knot_nodes: Vec<usize>,
}

impl SkeletonMesh {
    /// Mesh every arc with elements of size at most `h` (at least one per gap
    /// between consecutive knot abscissae).
    pub fn build(skeleton: Arc<Skeleton>, h: f64, order: Order) -> Result<Arc<Self>> {
        if !(h > 0.0) {
            return Err(Error::OutOfRange {
                what: "element size h",
                value: h,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let n_arcs = skeleton.arcs.len();
        let mut arc_breaks = Vec::with_capacity(n_arcs);
        for (i, arc) in skeleton.arcs.iter().enumerate() {
            let l = arc.length();
            let mut pts = vec![0.0, l];
            for k in &skeleton.knots {
                pts.extend(k.incidence_on(i).map(|inc| inc.s.clamp(0.0, l)));
            }
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * l);
            *pts.last_mut().unwrap() = l;
            let mut breaks = vec![pts[0]];
            for w in pts.windows(2) {
                let n = (((w[1] - w[0]) / h) - 1e-9).ceil().max(1.0) as usize;
                for k in 1..=n {
                    breaks.push(if k == n {
                        w[1]
                    } else {
                        w[0] + (w[1] - w[0]) * k as f64 / n as f64
                    });
                }
            }
            arc_breaks.push(breaks);
        }

        // Provisional vertex ids per arc boundary, merged by union-find.
        let mut offset = vec![0usize; n_arcs + 1];
        for i in 0..n_arcs {
            offset[i + 1] = offset[i] + arc_breaks[i].len();
        }
        let mut parent: Vec<usize> = (0..offset[n_arcs]).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let locate = |arc: usize, s: f64| -> usize {
            let b = &arc_breaks[arc];
            let k = b
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - s).abs().partial_cmp(&(y.1 - s).abs()).unwrap())
                .unwrap()
                .0;
            offset[arc] + k
        };
        let mut knot_roots = vec![];
        for k in &skeleton.knots {
            let ids: Vec<usize> = k.incidences.iter().map(|inc| locate(inc.arc, inc.s)).collect();
            for &id in &ids[1..] {
                let (a, b) = (find(&mut parent, ids[0]), find(&mut parent, id));
                parent[b] = a;
            }
            knot_roots.push(ids[0]);
        }
        for (i, arc) in skeleton.arcs.iter().enumerate() {
            if arc.is_closed() {
                let (a, b) = (
                    find(&mut parent, offset[i]),
                    find(&mut parent, offset[i + 1] - 1),
                );
                parent[b] = a;
            }
        }
        let mut root_to_vertex = vec![usize::MAX; parent.len()];
        let mut n_vertices = 0;
        let mut arc_vertices = Vec::with_capacity(n_arcs);
        let mut node_location = vec![];
        for i in 0..n_arcs {
            let mut vs = vec![];
            for k in 0..arc_breaks[i].len() {
                let r = find(&mut parent, offset[i] + k);
                if root_to_vertex[r] == usize::MAX {
                    root_to_vertex[r] = n_vertices;
                    node_location.push((i, arc_breaks[i][k]));
                    n_vertices += 1;
                }
                vs.push(root_to_vertex[r]);
            }
            arc_vertices.push(vs);
        }
        let knot_nodes: Vec<usize> = knot_roots
            .iter()
            .map(|&id| root_to_vertex[find(&mut parent, id)])
            .collect();

        let mut clamped = vec![false; n_vertices];
        for c in &skeleton.clamped {
            let vs = &arc_vertices[c.arc];
            let v = match c.end {
                crate::geometry::End::Start => vs[0],
                crate::geometry::End::End => *vs.last().unwrap(),
            };
            clamped[v] = true;
        }

        let (g2, w2) = gauss_legendre(2);
        let (g4, w4) = gauss_legendre(4);
        let mut elements = vec![];
        let mut arc_elements = vec![];
        let mut n_nodes = n_vertices;
        for i in 0..n_arcs {
            let start = elements.len();
            let arc = &skeleton.arcs[i];
            for k in 0..arc_breaks[i].len() - 1 {
                let (s0, s1) = (arc_breaks[i][k], arc_breaks[i][k + 1]);
                let (v0, v1) = (arc_vertices[i][k], arc_vertices[i][k + 1]);
                let nodes = match order {
                    Order::P1 => vec![v0, v1],
                    Order::P2 => {
                        node_location.push((i, 0.5 * (s0 + s1)));
                        n_nodes += 1;
                        vec![v0, n_nodes - 1, v1]
                    }
                };
                let rule = |g: &[f64], w: &[f64]| -> Result<Vec<QuadPoint>> {
                    g.iter()
                        .zip(w)
                        .map(|(&xi, &wt)| {
                            let s = s0 + (s1 - s0) * xi;
                            Ok(QuadPoint {
                                s,
                                xi,
                                weight: wt * (s1 - s0),
                                frame: arc.frame_at(s)?,
                            })
                        })
                        .collect()
                };
                elements.push(Element {
                    arc: i,
                    s0,
                    s1,
                    nodes,
                    q2: rule(&g2, &w2)?,
                    q4: rule(&g4, &w4)?,
                });
            }
            arc_elements.push(start..elements.len());
        }

        let mut node_free = vec![None; n_nodes];
        let mut free_nodes = vec![];
        for e in &elements {
            for &n in &e.nodes {
                if node_free[n].is_none() && !(n < n_vertices && clamped[n]) {
                    node_free[n] = Some(free_nodes.len());
                    free_nodes.push(n);
                }
            }
        }

        Ok(Arc::new(Self {
            skeleton,
            order,
            h,
            elements,
            arc_elements,
            arc_breaks,
            n_vertices,
            arc_vertices,
            node_location,
            node_free,
            free_nodes,
            knot_nodes,
        }))
    }

    /// Same element partition with another polynomial order.
    pub fn with_order(&self, order: Order) -> Result<Arc<Self>> {
        Self::build(self.skeleton.clone(), self.h, order)
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.skeleton
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn target_h(&self) -> f64 {
        self.h
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn arc_elements(&self, arc: usize) -> &[Element] {
        &self.elements[self.arc_elements[arc].clone()]
    }

    pub fn arc_element_range(&self, arc: usize) -> std::ops::Range<usize> {
        self.arc_elements[arc].clone()
    }

    /// Element boundary abscissae on an arc.
    pub fn breaks(&self, arc: usize) -> &[f64] {
        &self.arc_breaks[arc]
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_nodes(&self) -> usize {
        self.node_free.len()
    }

    pub fn n_free_nodes(&self) -> usize {
        self.free_nodes.len()
    }

    /// Number of scalar unknowns of a vector field (3 per free node).
    pub fn n_dofs(&self) -> usize {
        3 * self.free_nodes.len()
    }

    pub fn node_free(&self, node: usize) -> Option<usize> {
        self.node_free[node]
    }

    /// A representative `(arc, s)` for a node.
    pub fn node_location(&self, node: usize) -> (usize, f64) {
        self.node_location[node]
    }

    pub fn free_node_location(&self, free: usize) -> (usize, f64) {
        self.node_location[self.free_nodes[free]]
    }

    pub fn knot_node(&self, knot: usize) -> usize {
        self.knot_nodes[knot]
    }

    pub fn is_clamped(&self) -> bool {
        !self.skeleton.clamped.is_empty()
    }

    /// Global dof index of component `c` at `node`.
    pub fn dof(&self, node: usize, c: usize) -> Option<usize> {
        self.node_free[node].map(|f| 3 * f + c)
    }

    /// Vertex id at an element boundary `(arc, s)`, if `s` is one.
    pub fn vertex_at(&self, arc: usize, s: f64) -> Option<usize> {
        let b = self.arc_breaks.get(arc)?;
        let tol = 1e-10 * self.skeleton.arcs[arc].length();
        b.iter()
            .position(|x| (x - s).abs() <= tol)
            .map(|k| self.arc_vertices[arc][k])
    }

    /// Element containing `s` on `arc`, preferring `side` at boundaries.
    pub fn locate(&self, arc: usize, s: f64, side: Side) -> (usize, f64) {
        let b = &self.arc_breaks[arc];
        let n = b.len() - 1;
        let tol = 1e-12 * b[n];
        let mut k = match b.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => match side {
                Side::Left => i.saturating_sub(1),
                Side::Right => i,
            },
            Err(i) => i.saturating_sub(1),
        };
        if side == Side::Left && k > 0 && (s - b[k]).abs() <= tol {
            k -= 1;
        }
        let k = k.min(n - 1);
        let e = self.arc_elements[arc].start + k;
        let el = &self.elements[e];
        (e, ((s - el.s0) / el.h()).clamp(0.0, 1.0))
    }

    /// Interpolation abscissae of all nodes as `(node, arc, s)`.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.node_location
            .iter()
            .enumerate()
            .map(|(n, &(a, s))| (n, a, s))
    }

    /// Sum of `f(q)` over the four-point rule of every element.
    pub fn integrate(&self, f: impl Fn(&Element, &QuadPoint) -> f64) -> f64 {
        self.elements
            .iter()
            .map(|e| e.q4.iter().map(|q| q.weight * f(e, q)).sum::<f64>())
            .sum()
    }

    pub fn position(&self, arc: usize, s: f64) -> Vec3 {
        self.skeleton.arcs[arc].position(s.clamp(0.0, self.skeleton.arcs[arc].length())).unwrap()
    }
}
