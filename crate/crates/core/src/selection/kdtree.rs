//! Median-split k-d tree over 3-D points with exact radius queries.

/// Static k-d tree: build once, query many times. Points are referenced by
/// their index in the input slice.
pub struct KdTree {
    points: Vec<[f64; 3]>,
    root: Option<Box<Node>>,
}

struct Node {
    index: usize,
    axis: usize,
    left: Option<Box<Node>>,
    right: Option<Box<Node>>,
}

impl KdTree {
    pub fn build(points: &[[f64; 3]]) -> Self {
        let mut indices: Vec<usize> = (0..points.len()).collect();
        let root = build_node(points, &mut indices, 0);
        Self {
            points: points.to_vec(),
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of all points with Euclidean distance ≤ `radius` from
    /// `center` (the center itself included when it is a tree point),
    /// ascending.
    pub fn within_radius(&self, center: [f64; 3], radius: f64) -> Vec<usize> {
        debug_assert!(radius >= 0.0);
        let mut hits = Vec::new();
        if let Some(root) = &self.root {
            self.search(root, center, radius, radius * radius, &mut hits);
        }
        hits.sort_unstable();
        hits
    }

    fn search(
        &self,
        node: &Node,
        center: [f64; 3],
        radius: f64,
        radius_sq: f64,
        hits: &mut Vec<usize>,
    ) {
        let p = self.points[node.index];
        let d_sq = (0..3).map(|k| (p[k] - center[k]).powi(2)).sum::<f64>();
        if d_sq <= radius_sq {
            hits.push(node.index);
        }
        // children on the near side of the splitting plane always qualify;
        // the far side only if the plane is within the radius
        let diff = center[node.axis] - p[node.axis];
        let (near, far) = if diff < 0.0 {
            (&node.left, &node.right)
        } else {
            (&node.right, &node.left)
        };
        if let Some(n) = near {
            self.search(n, center, radius, radius_sq, hits);
        }
        if diff.abs() <= radius {
            if let Some(f) = far {
                self.search(f, center, radius, radius_sq, hits);
            }
        }
    }
}

fn build_node(points: &[[f64; 3]], indices: &mut [usize], depth: usize) -> Option<Box<Node>> {
    if indices.is_empty() {
        return None;
    }
    let axis = depth % 3;
    let mid = indices.len() / 2;
    indices.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis]
            .partial_cmp(&points[b][axis])
            .expect("finite coordinates")
    });
    let index = indices[mid];
    let (left, right) = indices.split_at_mut(mid);
    Some(Box::new(Node {
        index,
        axis,
        left: build_node(points, left, depth + 1),
        right: build_node(points, &mut right[1..], depth + 1),
    }))
}
