//! UE movement: shortest-path street following and random waypoint in areas.

use std::collections::VecDeque;

use petgraph::algo::astar;
use petgraph::graph::{EdgeIndex, NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Point, Polygon, Polyline};

const MERGE_TOL: f64 = 1e-6;
/// Positions within this distance of a street centerline count as on it.
pub const STREET_TOL: f64 = 1e-6;

/// Street centerlines as an undirected graph. Crossing polylines are split at
/// their intersections so that UEs can turn there.
#[derive(Debug, Clone)]
pub struct StreetNetwork {
    graph: UnGraph<Point, f64>,
    /// Connected-component label of each node.
    component: Vec<usize>,
    members: Vec<Vec<NodeIndex>>,
    cumulative: Vec<f64>,
}

fn segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = (b.x - a.x, b.y - a.y);
    let s = (d.x - c.x, d.y - c.y);
    let denom = r.0 * s.1 - r.1 * s.0;
    if denom.abs() < 1e-12 {
        return None;
    }
    let qp = (c.x - a.x, c.y - a.y);
    let t = (qp.0 * s.1 - qp.1 * s.0) / denom;
    let u = (qp.0 * r.1 - qp.1 * r.0) / denom;
    let tol = 1e-9;
    if (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&u) {
        Some(a.lerp(b, t.clamp(0.0, 1.0)))
    } else {
        None
    }
}

impl StreetNetwork {
    pub fn build(streets: &[Polyline]) -> Result<Self> {
        let segments: Vec<(Point, Point)> = streets
            .iter()
            .flat_map(|s| s.points.windows(2).map(|w| (w[0], w[1])))
            .collect();
        if segments.is_empty() {
            return Err(Error::config("street network has no segments"));
        }
        // split points per segment, as parameters along it
        let mut cuts: Vec<Vec<Point>> = segments.iter().map(|&(a, b)| vec![a, b]).collect();
        for i in 0..segments.len() {
            for j in i + 1..segments.len() {
                let (a, b) = segments[i];
                let (c, d) = segments[j];
                if let Some(p) = segment_intersection(a, b, c, d) {
                    cuts[i].push(p);
                    cuts[j].push(p);
                }
            }
        }

        let mut graph = UnGraph::<Point, f64>::new_undirected();
        let node_of = |graph: &mut UnGraph<Point, f64>, p: Point| -> NodeIndex {
            graph
                .node_indices()
                .find(|&n| graph[n].dist(p) < MERGE_TOL)
                .unwrap_or_else(|| graph.add_node(p))
        };
        for (seg, pts) in segments.iter().zip(cuts.iter_mut()) {
            let a = seg.0;
            pts.sort_by(|p, q| a.dist(*p).total_cmp(&a.dist(*q)));
            pts.dedup_by(|p, q| p.dist(*q) < MERGE_TOL);
            for w in pts.windows(2) {
                let u = node_of(&mut graph, w[0]);
                let v = node_of(&mut graph, w[1]);
                if u != v && graph.find_edge(u, v).is_none() {
                    graph.add_edge(u, v, w[0].dist(w[1]));
                }
            }
        }

        let mut uf = UnionFind::<usize>::new(graph.node_count());
        for e in graph.edge_indices() {
            let (u, v) = graph.edge_endpoints(e).expect("edge exists");
            uf.union(u.index(), v.index());
        }
        let labels = uf.into_labeling();
        let mut roots: Vec<usize> = labels.clone();
        roots.sort_unstable();
        roots.dedup();
        let component: Vec<usize> = labels
            .iter()
            .map(|l| roots.binary_search(l).expect("label present"))
            .collect();
        let mut members = vec![Vec::new(); roots.len()];
        for n in graph.node_indices() {
            members[component[n.index()]].push(n);
        }
        let mut total = 0.0;
        let cumulative = graph
            .edge_weights()
            .map(|w| {
                total += w;
                total
            })
            .collect();

        Ok(Self {
            graph,
            component,
            members,
            cumulative,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn total_length(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn position(&self, n: NodeIndex) -> Point {
        self.graph[n]
    }

    pub fn degree(&self, n: NodeIndex) -> usize {
        self.graph.neighbors(n).count()
    }

    /// Distance from `p` to the nearest centerline.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.graph
            .edge_indices()
            .map(|e| {
                let (u, v) = self.graph.edge_endpoints(e).expect("edge exists");
                point_segment_distance(p, self.graph[u], self.graph[v])
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.distance_to(p) <= STREET_TOL
    }

    /// Uniform point on the network: an edge chosen proportionally to its
    /// length and an offset along it from its first endpoint.
    fn random_location(&self, rng: &mut ChaCha8Rng) -> (EdgeIndex, f64) {
        let u = rng.random::<f64>() * self.total_length();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        let start = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        let e = EdgeIndex::new(i);
        (e, (u - start).clamp(0.0, self.graph[e]))
    }

    /// Random node reachable from `from`, other than `from` itself.
    fn random_destination(&self, from: NodeIndex, rng: &mut ChaCha8Rng) -> NodeIndex {
        let pool = &self.members[self.component[from.index()]];
        let k = rng.random_range(0..pool.len() - 1);
        let pick = pool[k];
        if pick == from {
            pool[pool.len() - 1]
        } else {
            pick
        }
    }

    /// Node sequence from `from` to `to`, excluding `from`.
    fn route(&self, from: NodeIndex, to: NodeIndex) -> VecDeque<NodeIndex> {
        let target = self.graph[to];
        let (_, path) = astar(&self.graph, from, |n| n == to, |e| *e.weight(), |n| self.graph[n].dist(target))
            .expect("destination lies in the same component");
        path.into_iter().skip(1).collect()
    }
}

#[derive(Debug, Clone)]
enum Mover {
    Street {
        from: NodeIndex,
        to: NodeIndex,
        /// Distance travelled from `from` along the current edge.
        offset: f64,
        route: VecDeque<NodeIndex>,
    },
    Waypoint {
        area: usize,
        target: Point,
    },
}

/// Domain a UE moves in, resolved to an index into the world's areas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDomain {
    Streets,
    Area(usize),
}

#[derive(Debug, Clone)]
pub struct UeMobility {
    pub group: usize,
    pub domain: MoveDomain,
    pub position: Point,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub speed_mps: f64,
    step_m: f64,
    mover: Mover,
    rng: ChaCha8Rng,
    /// Path length covered during the last step.
    pub last_path_m: f64,
    /// The last step passed a street node or waypoint, so the straight-line
    /// displacement may be shorter than the path length.
    pub turned: bool,
}

fn uniform_in_polygon(poly: &Polygon, rng: &mut ChaCha8Rng) -> Point {
    let bb = poly.bounding_box();
    loop {
        let p = Point::new(rng.random_range(bb.x0..=bb.x1), rng.random_range(bb.y0..=bb.y1));
        if poly.contains(p) {
            return p;
        }
    }
}

impl UeMobility {
    /// Place a UE uniformly in its domain. `placement` draws the initial
    /// location and direction; `rng` drives all later movement.
    #[allow(clippy::too_many_arguments)]
    pub fn place(
        group: usize,
        domain: MoveDomain,
        speed_kmh: f64,
        dt_ms: u32,
        streets: Option<&StreetNetwork>,
        areas: &[Polygon],
        placement: &mut ChaCha8Rng,
        mut rng: ChaCha8Rng,
    ) -> Self {
        let speed_mps = speed_kmh / 3.6;
        let step_m = speed_mps * f64::from(dt_ms) / 1000.0;
        let (position, mover) = match domain {
            MoveDomain::Streets => {
                let net = streets.expect("street domain requires a street network");
                let (e, offset) = net.random_location(placement);
                let (a, b) = net.graph.edge_endpoints(e).expect("edge exists");
                let len = net.graph[e];
                let (from, to, offset) = if placement.random_bool(0.5) {
                    (a, b, offset)
                } else {
                    (b, a, len - offset)
                };
                let pos = net.graph[from].lerp(net.graph[to], offset / len);
                (
                    pos,
                    Mover::Street {
                        from,
                        to,
                        offset,
                        route: VecDeque::new(),
                    },
                )
            }
            MoveDomain::Area(i) => {
                let pos = uniform_in_polygon(&areas[i], placement);
                let target = uniform_in_polygon(&areas[i], &mut rng);
                (pos, Mover::Waypoint { area: i, target })
            }
        };
        let mut ue = Self {
            group,
            domain,
            position,
            heading: 0.0,
            speed_mps,
            step_m,
            mover,
            rng,
            last_path_m: 0.0,
            turned: false,
        };
        ue.update_heading(streets);
        ue
    }

    fn update_heading(&mut self, streets: Option<&StreetNetwork>) {
        match &self.mover {
            Mover::Street { from, to, .. } => {
                let net = streets.expect("street mover");
                self.heading = net.graph[*from].heading_to(net.graph[*to]);
            }
            Mover::Waypoint { target, .. } => {
                if self.position.dist(*target) > 0.0 {
                    self.heading = self.position.heading_to(*target);
                }
            }
        }
    }

    /// Advance by `speed * dt` along the path. Returns the straight-line
    /// displacement.
    pub fn advance(&mut self, streets: Option<&StreetNetwork>, areas: &[Polygon]) -> f64 {
        let start = self.position;
        let mut remaining = self.step_m;
        self.turned = false;
        match &mut self.mover {
            Mover::Street {
                from,
                to,
                offset,
                route,
            } => {
                let net = streets.expect("street mover");
                loop {
                    let len = net.graph[net.graph.find_edge(*from, *to).expect("adjacent nodes")];
                    let left = len - *offset;
                    if remaining < left {
                        *offset += remaining;
                        self.position = net.graph[*from].lerp(net.graph[*to], *offset / len);
                        break;
                    }
                    remaining -= left;
                    if route.is_empty() {
                        let dest = net.random_destination(*to, &mut self.rng);
                        *route = net.route(*to, dest);
                    }
                    let next = route.pop_front().expect("route is non-empty");
                    *from = *to;
                    *to = next;
                    *offset = 0.0;
                    self.turned = true;
                    if remaining == 0.0 {
                        self.position = net.graph[*from];
                        break;
                    }
                }
            }
            Mover::Waypoint { area, target } => loop {
                let d = self.position.dist(*target);
                if remaining < d {
                    self.position = self.position.lerp(*target, remaining / d);
                    break;
                }
                remaining -= d;
                self.position = *target;
                *target = uniform_in_polygon(&areas[*area], &mut self.rng);
                self.turned = true;
                if remaining == 0.0 {
                    break;
                }
            },
        }
        self.last_path_m = self.step_m;
        self.update_heading(streets);
        start.dist(self.position)
    }
}
