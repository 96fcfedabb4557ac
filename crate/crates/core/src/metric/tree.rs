//! Rooted trees whose ends form the space. The distance between two ends
//! is the width of their least common ancestor, `ratio^depth`.
//!
//! Points are finite child-index paths read with a tail of zeros. A ball
//! is the cylinder of all ends sharing a prefix, which makes covering
//! exact: a depth-first search either finds a free child or proves every
//! cylinder is covered.

use super::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Branching {
    /// Per-level child counts; the last entry repeats.
    Uniform(Vec<u32>),
    /// Level-i nodes have `exp(ratio^{-i·d} (2^d − 1))` children (rounded
    /// up, saturated). With ratio 1/2 this gives log-covering dimension d.
    LogUniform { d: f64 },
    /// 4^i nodes at level i. Children 0 and 1 of a fat node are fat; a fat
    /// node at level i has 2^{i+1} + 2 children, a thin node has 2.
    FatSubtree,
}

#[derive(Debug, Clone)]
pub struct TreeSpace {
    ratio: f64,
    branching: Branching,
    max_depth: usize,
}

impl TreeSpace {
    pub fn new(ratio: f64, branching: Branching, max_depth: usize) -> Result<Self, MetricError> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(MetricError::Invalid(format!("tree width ratio must lie in (0,1), got {ratio}")));
        }
        if let Branching::Uniform(c) = &branching {
            if c.is_empty() || c.iter().any(|&b| b < 2) {
                return Err(MetricError::Invalid("uniform branching needs counts ≥ 2".into()));
            }
        }
        if max_depth == 0 || max_depth > 60 {
            return Err(MetricError::Invalid("tree depth must lie in 1..=60".into()));
        }
        Ok(TreeSpace { ratio, branching, max_depth })
    }

    /// The fat-subtree family with widths `ratio^i`.
    pub fn fat_subtree(ratio: f64) -> Self {
        TreeSpace { ratio, branching: Branching::FatSubtree, max_depth: 48 }
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn branching(&self) -> &Branching {
        &self.branching
    }

    pub fn width(&self, depth: usize) -> f64 {
        self.ratio.powi(depth as i32)
    }

    fn is_fat(prefix: &[u32]) -> bool {
        prefix.iter().all(|&c| c <= 1)
    }

    fn ln_children_at(&self, level: usize, fat: bool) -> f64 {
        match &self.branching {
            Branching::Uniform(c) => (*c.get(level).unwrap_or(c.last().unwrap()) as f64).ln(),
            Branching::LogUniform { d } => {
                let v = self.ratio.powf(-(level as f64) * d) * (2f64.powf(*d) - 1.0);
                v.max(2f64.ln())
            }
            Branching::FatSubtree => {
                if fat {
                    ((1u64 << (level + 1)) as f64 + 2.0).ln()
                } else {
                    2f64.ln()
                }
            }
        }
    }

    /// Number of children of the node at `prefix`, saturated at u32::MAX.
    pub fn children_of(&self, prefix: &[u32]) -> u64 {
        let level = prefix.len();
        match &self.branching {
            Branching::FatSubtree => {
                if Self::is_fat(prefix) {
                    (1u64 << (level + 1).min(62)) + 2
                } else {
                    2
                }
            }
            _ => {
                let ln = self.ln_children_at(level, false);
                if ln > (u32::MAX as f64).ln() {
                    u32::MAX as u64
                } else {
                    ln.exp().ceil() as u64
                }
            }
        }
    }

    /// ln of the number of nodes at `depth`.
    pub fn ln_level_count(&self, depth: usize) -> f64 {
        match &self.branching {
            Branching::FatSubtree => depth as f64 * 4f64.ln(),
            _ => (0..depth).map(|i| self.ln_children_at(i, false)).sum(),
        }
    }

    fn entry(p: &[u32], i: usize) -> u32 {
        p.get(i).copied().unwrap_or(0)
    }

    fn path<'a>(&self, p: &'a Point) -> Option<&'a [u32]> {
        match p {
            Point::TreePath(v) => Some(v),
            _ => None,
        }
    }

    fn common_prefix(&self, a: &[u32], b: &[u32]) -> usize {
        let n = a.len().max(b.len()).min(self.max_depth);
        (0..n).find(|&i| Self::entry(a, i) != Self::entry(b, i)).unwrap_or(self.max_depth)
    }

    /// Depth of the cylinder equal to the ball.
    fn cylinder_depth(&self, r: f64, closed: bool) -> usize {
        let mut m = 0;
        while m < self.max_depth {
            let w = self.width(m);
            if (closed && w <= r) || (!closed && w < r) {
                break;
            }
            m += 1;
        }
        m
    }

    fn cylinder(&self, b: &Ball) -> Option<Vec<u32>> {
        let p = self.path(&b.center)?;
        let m = self.cylinder_depth(b.radius, b.closed);
        Some((0..m).map(|i| Self::entry(p, i)).collect())
    }

    fn region_feasible(&self, region: &Region, prefix: &[u32]) -> bool {
        match region {
            Region::All | Region::ThinPart => true,
            Region::FatSubtree => matches!(self.branching, Branching::FatSubtree) && Self::is_fat(prefix),
            _ => false,
        }
    }

    fn witness(&self, region: &Region, prefix: &[u32]) -> Vec<u32> {
        let mut w = prefix.to_vec();
        if matches!(region, Region::ThinPart)
            && matches!(self.branching, Branching::FatSubtree)
            && Self::is_fat(prefix)
            && w.len() < self.max_depth
        {
            w.push(2);
        }
        w
    }

    fn search(&self, prefix: &mut Vec<u32>, cyls: &[&[u32]], region: &Region) -> Option<Vec<u32>> {
        if !self.region_feasible(region, prefix) {
            return None;
        }
        let depth = prefix.len();
        if cyls.iter().any(|c| c.len() <= depth) {
            return None;
        }
        if cyls.is_empty() {
            return Some(self.witness(region, prefix));
        }
        if depth >= self.max_depth {
            return None;
        }
        let allowed = match region {
            Region::FatSubtree => 2,
            _ => self.children_of(prefix),
        };
        let mut used: Vec<u32> = cyls.iter().map(|c| c[depth]).collect();
        used.sort_unstable();
        used.dedup();
        let mut next_free = 0u64;
        for &c in &used {
            if (c as u64) > next_free && next_free < allowed {
                break;
            }
            next_free = c as u64 + 1;
        }
        if next_free < allowed {
            prefix.push(next_free as u32);
            let found = self.region_feasible(region, prefix).then(|| self.witness(region, prefix));
            prefix.pop();
            if found.is_some() {
                return found;
            }
        }
        for &c in used.iter().filter(|&&c| (c as u64) < allowed) {
            let below: Vec<&[u32]> = cyls.iter().copied().filter(|cy| cy[depth] == c).collect();
            prefix.push(c);
            let found = self.search(prefix, &below, region);
            prefix.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn enumerate(&self, prefix: &mut Vec<u32>, depth: usize, limit: usize, out: &mut Vec<Point>) -> bool {
        if prefix.len() == depth {
            if out.len() >= limit {
                return false;
            }
            out.push(Point::TreePath(prefix.clone()));
            return true;
        }
        let k = self.children_of(prefix);
        for c in 0..k {
            prefix.push(c as u32);
            let ok = self.enumerate(prefix, depth, limit, out);
            prefix.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

impl MetricSpace for TreeSpace {
    fn kind(&self) -> PointKind {
        PointKind::TreePath
    }

    fn name(&self) -> String {
        match &self.branching {
            Branching::FatSubtree => format!("fat-subtree(ratio={})", self.ratio),
            Branching::Uniform(c) => format!("tree(ratio={}, branching={c:?})", self.ratio),
            Branching::LogUniform { d } => format!("log-uniform-tree(ratio={}, d={d})", self.ratio),
        }
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (self.path(x), self.path(y)) {
            (Some(a), Some(b)) => {
                let m = self.common_prefix(a, b);
                if m >= self.max_depth {
                    0.0
                } else {
                    self.width(m)
                }
            }
            _ => f64::NAN,
        }
    }

    fn eta(&self) -> f64 {
        self.width(self.max_depth)
    }

    fn validate_point(&self, p: &Point) -> Result<(), MetricError> {
        let Some(path) = self.path(p) else {
            return Err(MetricError::KindMismatch { expected: PointKind::TreePath, got: p.kind() });
        };
        for i in 0..path.len() {
            if path[i] as u64 >= self.children_of(&path[..i]) {
                return Err(MetricError::OutOfSpace(format!("child {} at level {i}", path[i])));
            }
        }
        Ok(())
    }

    fn find_uncovered(&self, balls: &[Ball], region: &Region, within: Option<&Ball>) -> Option<Point> {
        let cyls: Vec<Vec<u32>> = balls.iter().filter_map(|b| self.cylinder(b)).collect();
        let mut start = match within {
            Some(w) => self.cylinder(w)?,
            None => vec![],
        };
        let d0 = start.len();
        let relevant: Vec<&[u32]> = cyls
            .iter()
            .filter(|c| {
                let k = c.len().min(d0);
                c[..k] == start[..k]
            })
            .map(|c| c.as_slice())
            .collect();
        self.search(&mut start, &relevant, region).map(Point::TreePath)
    }

    fn net_points(&self, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool) {
        let mut start = match within {
            Some(w) => match self.cylinder(w) {
                Some(c) => c,
                None => return (vec![], true),
            },
            None => vec![],
        };
        let q = self.cylinder_depth(delta, false).max(start.len());
        let mut out = Vec::new();
        let done = self.enumerate(&mut start, q, limit, &mut out);
        (out, done)
    }

    fn sample_near(&self, y: &Point, rho: f64) -> Option<Point> {
        let p = self.path(y)?;
        let m = self.cylinder_depth(rho, false);
        if m >= self.max_depth {
            return None;
        }
        let mut v: Vec<u32> = (0..=m).map(|i| Self::entry(p, i)).collect();
        v[m] = if v[m] == 0 { 1 } else { 0 };
        Some(Point::TreePath(v))
    }

    fn grid_point(&self, rng: &mut dyn rand::RngCore) -> Point {
        let mut v = Vec::new();
        for _ in 0..self.max_depth.min(24) {
            let k = self.children_of(&v);
            v.push((rng.next_u64() % k) as u32);
        }
        Point::TreePath(v)
    }

    fn mesh(&self, size: usize) -> Vec<Point> {
        let mut depth = 0;
        while depth < self.max_depth && self.ln_level_count(depth + 1) <= (size.max(1) as f64).ln() {
            depth += 1;
        }
        let mut out = Vec::new();
        self.enumerate(&mut vec![], depth, size.max(1), &mut out);
        out
    }

    fn region_contains(&self, region: &Region, p: &Point) -> bool {
        let Some(path) = self.path(p) else { return false };
        let fat = matches!(self.branching, Branching::FatSubtree) && Self::is_fat(path);
        match region {
            Region::All => true,
            Region::FatSubtree => fat,
            Region::ThinPart => !fat,
            _ => false,
        }
    }

    fn region_meets_ball(&self, region: &Region, ball: &Ball) -> bool {
        match self.cylinder(ball) {
            Some(c) => self.region_feasible(region, &c),
            None => false,
        }
    }

    fn complement(&self, region: &Region) -> Result<Region, MetricError> {
        Ok(match region {
            Region::All => Region::Empty,
            Region::Empty => Region::All,
            Region::FatSubtree => Region::ThinPart,
            Region::ThinPart => Region::FatSubtree,
            _ => return Err(MetricError::Unsupported("region complement")),
        })
    }

    fn analytic_dims(&self) -> AnalyticDims {
        let inv = (1.0 / self.ratio).ln();
        match &self.branching {
            Branching::FatSubtree => AnalyticDims {
                covering: Some(4f64.ln() / inv),
                max_min_covering: Some(2f64.ln() / inv),
                log_covering: Some(0.0),
            },
            Branching::Uniform(c) if c.iter().all(|&b| b == c[0]) => {
                let d = (c[0] as f64).ln() / inv;
                AnalyticDims { covering: Some(d), max_min_covering: Some(d), log_covering: Some(0.0) }
            }
            Branching::Uniform(_) => AnalyticDims::default(),
            Branching::LogUniform { d } => AnalyticDims {
                covering: None,
                max_min_covering: None,
                log_covering: Some(*d * 2f64.ln() / inv),
            },
        }
    }
}
