//! Hypersphere regions and their fractal decomposition.
//!
//! All search happens inside the unit box `[0, 1]^D`. A region is a
//! hypersphere; decomposing it yields `2·D` children placed on the
//! coordinate axes at half the parent radius from the parent center.
//! Problem bounds are only applied when a point is evaluated.

use crate::error::{Error, Result};

/// Default child radius inflation coefficient.
pub const DEFAULT_INFLATION: f64 = 1.75;

/// A search region in unit-box coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypersphere {
    pub center: Vec<f64>,
    pub radius: f64,
    pub level: usize,
    /// Lower is better. `None` until the sphere has been scored.
    pub quality: Option<f64>,
    /// Child indices from the root; its length equals `level`.
    pub id_path: Vec<usize>,
}

impl Hypersphere {
    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Axis-aligned box constraint `lower[d] < upper[d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(d) = (0..lower.len()).find(|&d| !(lower[d] < upper[d])) {
            return Err(Error::InvalidConfig(format!(
                "bounds on coordinate {d} are empty: [{}, {}]",
                lower[d], upper[d]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval on every coordinate.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::uniform(dim, 0.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }
}

/// Root sphere inscribed in the unit box.
pub fn unit_root(dim: usize) -> Result<Hypersphere> {
    if dim < 1 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(Hypersphere {
        center: vec![0.5; dim],
        radius: 0.5,
        level: 0,
        quality: None,
        id_path: Vec::new(),
    })
}

/// Splits `parent` into `2·D` children ordered by child index `j`.
///
/// Child `j` sits on axis `j / 2` at `+r/2` for even `j` and `-r/2` for odd
/// `j`, with radius `inflation · r/2`.
pub fn decompose(parent: &Hypersphere, inflation: f64) -> Vec<Hypersphere> {
    debug_assert!(parent.radius > 0.0);
    let dim = parent.dim();
    let offset = parent.radius / 2.0;
    let radius = inflation * offset;
    (0..2 * dim)
        .map(|j| {
            let mut center = parent.center.clone();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            center[j / 2] += sign * offset;
            let mut id_path = Vec::with_capacity(parent.id_path.len() + 1);
            id_path.extend_from_slice(&parent.id_path);
            id_path.push(j);
            Hypersphere {
                center,
                radius,
                level: parent.level + 1,
                quality: None,
                id_path,
            }
        })
        .collect()
}

/// Maps a unit-box point into problem space, clamping overhang first.
pub fn to_problem_space(x_unit: &[f64], bounds: &BoxBounds) -> Result<Vec<f64>> {
    if x_unit.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            actual: x_unit.len(),
        });
    }
    let mut out = vec![0.0; x_unit.len()];
    map_into(x_unit, bounds, &mut out);
    Ok(out)
}

/// Allocation-free variant of [`to_problem_space`]; lengths must agree.
pub(crate) fn map_into(x_unit: &[f64], bounds: &BoxBounds, out: &mut [f64]) {
    for (d, y) in out.iter_mut().enumerate() {
        let t = x_unit[d].clamp(0.0, 1.0);
        let (lo, hi) = (bounds.lower[d], bounds.upper[d]);
        // Keep the upper end exact so the result never leaves the box.
        *y = if t == 1.0 {
            hi
        } else {
            (lo + t * (hi - lo)).min(hi)
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn root_is_centered() {
        let root = unit_root(1).unwrap();
        assert_eq!(root.center, vec![0.5]);
        assert_eq!(root.radius, 0.5);
        assert_eq!(root.level, 0);
        assert!(root.id_path.is_empty());

        let root = unit_root(30).unwrap();
        assert_eq!(root.center, vec![0.5; 30]);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(unit_root(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn decompose_root_in_2d() {
        let children = decompose(&unit_root(2).unwrap(), DEFAULT_INFLATION);
        assert_eq!(children.len(), 4);
        assert!(children.iter().all(|c| c.level == 1));
    }

    #[test]
    fn decompose_identity_inflation() {
        let children = decompose(&unit_root(2).unwrap(), 1.0);
        assert_eq!(children[0].center, vec![0.75, 0.5]);
        assert_eq!(children[0].radius, 0.25);
        assert_eq!(children[0].id_path, vec![0]);
    }

    #[test]
    fn decompose_3d_child_five() {
        let parent = Hypersphere {
            center: vec![0.0; 3],
            radius: 1.0,
            level: 0,
            quality: None,
            id_path: vec![],
        };
        let children = decompose(&parent, 1.75);
        assert_eq!(children[5].center, vec![0.0, 0.0, -0.5]);
        assert_eq!(children[5].radius, 0.875);
    }

    #[test]
    fn problem_space_mapping() {
        let unit = BoxBounds::unit(2).unwrap();
        assert_eq!(
            to_problem_space(&[0.5, 0.5], &unit).unwrap(),
            vec![0.5, 0.5]
        );

        let b = BoxBounds::uniform(1, -5.0, 5.0).unwrap();
        assert_eq!(to_problem_space(&[1.2], &b).unwrap(), vec![5.0]);

        let b = BoxBounds::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(to_problem_space(&[0.25, 0.75], &b).unwrap(), vec![0.5, 0.5]);

        assert!(matches!(
            to_problem_space(&[0.5], &unit),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_bounds_rejected() {
        assert!(BoxBounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(BoxBounds::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    fn sphere_strategy() -> impl Strategy<Value = Hypersphere> {
        (1usize..8)
            .prop_flat_map(|dim| {
                (
                    proptest::collection::vec(-2.0f64..2.0, dim),
                    0.001f64..3.0,
                    0usize..6,
                )
            })
            .prop_map(|(center, radius, level)| Hypersphere {
                center,
                radius,
                level,
                quality: None,
                id_path: vec![0; level],
            })
    }

    proptest! {
        #[test]
        fn children_count_and_placement(parent in sphere_strategy(), inflation in 1.0f64..2.0) {
            let children = decompose(&parent, inflation);
            prop_assert_eq!(children.len(), 2 * parent.dim());
            for child in &children {
                prop_assert_eq!(child.level, parent.level + 1);
                prop_assert_eq!(child.id_path.len(), child.level);
                prop_assert!(child.radius > 0.0);
                let dist = child
                    .center
                    .iter()
                    .zip(&parent.center)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                prop_assert!((dist - parent.radius / 2.0).abs() <= 1e-12 * (1.0 + parent.radius));
            }
            prop_assert_eq!(decompose(&parent, inflation), children);
        }

        #[test]
        fn mapped_points_stay_in_bounds(
            x in proptest::collection::vec(-1.0f64..2.0, 4),
            lo in -10.0f64..0.0,
            width in 0.01f64..20.0,
        ) {
            let bounds = BoxBounds::uniform(4, lo, lo + width).unwrap();
            let y = to_problem_space(&x, &bounds).unwrap();
            prop_assert!(bounds.contains(&y));
        }
    }
}
