//! Ball-trees: rooted trees of nested, well-separated balls.
//!
//! A tree is stored as a finite arena and extended on demand. Extension is
//! deterministic (children depend only on the parent ball), so concurrent
//! readers always see the same tree; the arena sits behind a lock.

use std::sync::RwLock;

use super::*;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub center: Point,
    pub radius: f64,
    /// Child indices from the root; also the node id used to key streams.
    pub path: Vec<u32>,
    pub parent: Option<usize>,
    /// `None` until the node is expanded.
    pub children: Option<Vec<usize>>,
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        self.path.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    Binary,
    Strength(f64),
    Explicit,
}

#[derive(Debug)]
pub struct BallTree {
    space: SpaceRef,
    rule: Rule,
    nodes: RwLock<Vec<TreeNode>>,
}

/// Largest child count a strength search will attempt.
const MAX_CHILDREN: usize = 1 << 20;

impl BallTree {
    fn with_root(space: SpaceRef, rule: Rule, center: Point, radius: f64) -> Result<Self, MetricError> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(MetricError::InvalidTree(format!("root radius {radius} outside (0,1]")));
        }
        space.validate_point(&center)?;
        let root = TreeNode { center, radius, path: vec![], parent: None, children: None };
        Ok(BallTree { space, rule, nodes: RwLock::new(vec![root]) })
    }

    /// A tree given node by node: `(parent id, center, radius)`, parents
    /// listed before their children. Nodes without listed children are
    /// leaves.
    pub fn from_explicit(space: SpaceRef, root: (Point, f64), nodes: Vec<(usize, Point, f64)>) -> Result<Self, MetricError> {
        let tree = Self::with_root(space, Rule::Explicit, root.0, root.1)?;
        {
            let mut arena = tree.nodes.write().unwrap();
            for (parent, center, radius) in nodes {
                if parent >= arena.len() {
                    return Err(MetricError::InvalidTree(format!("parent {parent} listed after child")));
                }
                let id = arena.len();
                let mut path = arena[parent].path.clone();
                let kids = arena[parent].children.get_or_insert_with(Vec::new);
                path.push(kids.len() as u32);
                kids.push(id);
                arena.push(TreeNode { center, radius, path, parent: Some(parent), children: None });
            }
            for n in arena.iter_mut() {
                n.children.get_or_insert_with(Vec::new);
            }
        }
        tree.validate(usize::MAX)?;
        Ok(tree)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn strength(&self) -> Option<f64> {
        match self.rule {
            Rule::Strength(d) => Some(d),
            _ => None,
        }
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, id: usize) -> TreeNode {
        self.nodes.read().unwrap()[id].clone()
    }

    /// Children of a node, expanding it if needed.
    pub fn children(&self, id: usize) -> Result<Vec<usize>, MetricError> {
        let (center, radius, depth) = {
            let arena = self.nodes.read().unwrap();
            let n = &arena[id];
            if let Some(c) = &n.children {
                return Ok(c.clone());
            }
            (n.center.clone(), n.radius, n.depth())
        };
        let (kids, child_radius) = match self.rule {
            Rule::Explicit => (vec![], 0.0),
            Rule::Binary => binary_children(self.space.as_ref(), &center, radius)?,
            Rule::Strength(d) => strength_children(self.space.as_ref(), &center, radius, d, depth)?,
        };
        let mut arena = self.nodes.write().unwrap();
        if let Some(c) = &arena[id].children {
            return Ok(c.clone());
        }
        let mut ids = Vec::with_capacity(kids.len());
        for (k, c) in kids.into_iter().enumerate() {
            let mut path = arena[id].path.clone();
            path.push(k as u32);
            ids.push(arena.len());
            arena.push(TreeNode { center: c, radius: child_radius, path, parent: Some(id), children: None });
        }
        arena[id].children = Some(ids.clone());
        Ok(ids)
    }

    /// Expands every node above `depth`.
    pub fn expand_to(&self, depth: usize) -> Result<(), MetricError> {
        let mut frontier = vec![self.root()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for id in frontier {
                next.extend(self.children(id)?);
            }
            frontier = next;
        }
        Ok(())
    }

    /// Ids of the expanded nodes at `depth`.
    pub fn level(&self, depth: usize) -> Vec<usize> {
        let arena = self.nodes.read().unwrap();
        (0..arena.len()).filter(|&i| arena[i].depth() == depth).collect()
    }

    /// Checks every clause of the ball-tree definition on expanded nodes
    /// up to `max_depth`.
    pub fn validate(&self, max_depth: usize) -> Result<(), MetricError> {
        let arena = self.nodes.read().unwrap();
        let s = self.space.as_ref();
        let bad = |msg: String| Err(MetricError::InvalidTree(msg));
        if !(arena[0].radius > 0.0 && arena[0].radius <= 1.0) {
            return bad("root radius outside (0,1]".into());
        }
        for (id, n) in arena.iter().enumerate() {
            if n.depth() >= max_depth {
                continue;
            }
            let Some(kids) = &n.children else { continue };
            if kids.is_empty() {
                continue;
            }
            let r = arena[kids[0]].radius;
            for &k in kids {
                let c = &arena[k];
                if c.radius != r {
                    return bad(format!("node {id}: children radii differ"));
                }
                if !(r > 0.0 && r <= n.radius / 4.0) {
                    return bad(format!("node {id}: child radius {r} exceeds a quarter of {}", n.radius));
                }
                if !(s.dist(&n.center, &c.center) + r < n.radius / 2.0) {
                    return bad(format!("node {id}: child {k} not nested"));
                }
            }
            for (i, &a) in kids.iter().enumerate() {
                for &b in &kids[i + 1..] {
                    if !(2.0 * r < s.dist(&arena[a].center, &arena[b].center)) {
                        return bad(format!("node {id}: siblings {a},{b} overlap"));
                    }
                }
            }
            if let Rule::Strength(d) = self.rule {
                let need = strength_need(r, d);
                if (kids.len() as f64) < need {
                    return bad(format!("node {id}: {} children, strength needs {need}", kids.len()));
                }
            }
        }
        Ok(())
    }
}

fn strength_need(r: f64, d: f64) -> f64 {
    r.powf(-d).ceil().max(2.0)
}

fn binary_children(space: &dyn MetricSpace, y: &Point, r: f64) -> Result<(Vec<Point>, f64), MetricError> {
    let z = space.sample_near(y, r / 3.0).ok_or_else(|| MetricError::PerfectnessViolated(y.to_string()))?;
    let d = space.dist(y, &z);
    if !(d > 0.0 && d < r / 3.0) {
        return Err(MetricError::PerfectnessViolated(y.to_string()));
    }
    // Radius D/3 keeps the two siblings strictly apart (2D/3 < D).
    Ok((vec![y.clone(), z], d / 3.0))
}

fn strength_children(space: &dyn MetricSpace, x: &Point, r: f64, d: f64, level: usize) -> Result<(Vec<Point>, f64), MetricError> {
    let window = Ball::open(x.clone(), r / 4.0);
    let floor = space.eta().max(1e-12);
    let mut rp = r / 4.0;
    while rp >= floor {
        // Shrunk slightly so that a packing at separation 2·rp gives
        // strictly disjoint sibling balls.
        let rc = rp * 0.99;
        let need = strength_need(rc, d);
        if need > MAX_CHILDREN as f64 {
            break;
        }
        let need = need as usize;
        let (pts, _) = space.net_points(2.0 * rp, need, Some(&window));
        if pts.len() >= need {
            return Ok((pts.into_iter().take(need).collect(), rc));
        }
        rp /= 2.0;
    }
    Err(MetricError::StrengthUnreachable(level))
}

/// Binary tree built from the space's perfectness sampler; validated.
pub fn build_ball_tree_binary(space: SpaceRef, depth: usize) -> Result<BallTree, MetricError> {
    let root = space.find_uncovered(&[], &Region::All, None).ok_or(MetricError::NoCoveredPoint)?;
    let tree = BallTree::with_root(space, Rule::Binary, root, 1.0)?;
    tree.expand_to(depth)?;
    tree.validate(depth)?;
    Ok(tree)
}

/// Tree of strength `d`: every node with children of radius r has at
/// least max(2, ⌈r^{-d}⌉) children. Validated.
pub fn build_ball_tree_strength(space: SpaceRef, d: f64, depth: usize) -> Result<BallTree, MetricError> {
    build_ball_tree_strength_at(space, d, depth, None)
}

/// As [`build_ball_tree_strength`], rooted at a chosen point. The default
/// root is a middle mesh point, away from boundary points whose balls are
/// one-sided.
pub fn build_ball_tree_strength_at(space: SpaceRef, d: f64, depth: usize, root: Option<Point>) -> Result<BallTree, MetricError> {
    if !(d >= 0.0) {
        return Err(MetricError::Invalid(format!("strength must be ≥ 0, got {d}")));
    }
    let root = match root {
        Some(p) => p,
        None => {
            let mesh = space.mesh(3);
            mesh.get(mesh.len() / 2).cloned().ok_or(MetricError::NoCoveredPoint)?
        }
    };
    let tree = BallTree::with_root(space, Rule::Strength(d), root, 1.0)?;
    tree.expand_to(depth)?;
    tree.validate(depth)?;
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn l1() -> SpaceRef {
        Arc::new(Interval::new(1.0).unwrap())
    }

    #[test]
    fn binary_depth_three_has_fifteen_nodes() {
        let t = build_ball_tree_binary(l1(), 3).unwrap();
        assert_eq!(t.len(), 15);
        t.validate(3).unwrap();
    }

    #[test]
    fn binary_depth_zero_is_root_only() {
        assert_eq!(build_ball_tree_binary(l1(), 0).unwrap().len(), 1);
    }

    #[test]
    fn two_point_space_is_not_perfect() {
        let s: SpaceRef = Arc::new(FiniteSpace::uniform(2, 1.0).unwrap());
        assert!(matches!(build_ball_tree_binary(s, 3), Err(MetricError::PerfectnessViolated(_))));
    }

    #[test]
    fn strength_half_on_the_line() {
        let t = build_ball_tree_strength(l1(), 0.5, 2).unwrap();
        for id in t.level(1) {
            let r = t.node(id).radius;
            assert!(t.level(1).len() as f64 >= r.powf(-0.5));
        }
    }

    #[test]
    fn strength_zero_means_two_children() {
        let t = build_ball_tree_strength(l1(), 0.0, 3).unwrap();
        for id in t.level(2) {
            assert_eq!(t.node(id).children.as_ref().unwrap().len(), 2);
        }
    }

    #[test]
    fn strength_above_thin_dimension_is_unreachable() {
        let s: SpaceRef = Arc::new(TreeSpace::fat_subtree(0.5));
        let thin = Point::TreePath(vec![2]);
        let r = build_ball_tree_strength_at(s, 1.5, 2, Some(thin));
        assert!(matches!(r, Err(MetricError::StrengthUnreachable(_))));
    }

    #[test]
    fn explicit_chain_validates_and_overlapping_siblings_fail() {
        let chain = (1..=4).map(|i| (i - 1, Point::Real1D(0.5), 4f64.powi(-(i as i32)))).collect();
        BallTree::from_explicit(l1(), (Point::Real1D(0.5), 1.0), chain).unwrap();
        let bad = vec![(0, Point::Real1D(0.5), 0.1), (0, Point::Real1D(0.55), 0.1)];
        assert!(BallTree::from_explicit(l1(), (Point::Real1D(0.5), 1.0), bad).is_err());
    }
}
