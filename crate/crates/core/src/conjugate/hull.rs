/// Lower convex hull of points sorted by strictly increasing abscissa
/// (Andrew's monotone chain). Collinear interior points are dropped.
pub fn lower_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b only if a -> b -> p turns counter-clockwise
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_points_above_the_hull() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (2.0, 1.0), (3.0, 3.0)];
        assert_eq!(lower_hull(&pts), vec![(0.0, 0.0), (2.0, 1.0), (3.0, 3.0)]);
    }

    #[test]
    fn collinear_points_collapse_to_endpoints() {
        let pts = [(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)];
        assert_eq!(lower_hull(&pts), vec![(0.0, 1.0), (2.0, 5.0)]);
    }
}
