//! Pareto dominance for minimization.

/// `a` dominates `b`: no worse in every objective and strictly better in one.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Flags every vector dominated by some other vector of the set. Equal
/// vectors never dominate each other.
pub fn dominated_flags(points: &[Vec<f64>]) -> Vec<bool> {
    points
        .iter()
        .map(|p| points.iter().any(|q| dominates(q, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_cases() {
        assert!(dominates(&[0.0, 0.0], &[1.0, 1.0]));
        assert!(dominates(&[0.0, 1.0], &[0.0, 2.0]));
        assert!(!dominates(&[0.0, 1.0], &[1.0, 0.0]));
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]));
    }

    #[test]
    fn flags() {
        assert_eq!(
            dominated_flags(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            vec![false, false]
        );
        assert_eq!(
            dominated_flags(&[vec![0.0, 0.0], vec![1.0, 1.0]]),
            vec![false, true]
        );
        assert_eq!(
            dominated_flags(&[vec![0.0, 1.0], vec![0.0, 1.0]]),
            vec![false, false]
        );
    }
}
