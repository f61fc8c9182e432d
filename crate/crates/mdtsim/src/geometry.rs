//! Planar geometry primitives shared across the simulator.

use serde::{Deserialize, Serialize};

/// A point in the simulation plane, metres from the area origin (south-west corner).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x_m: f64,
    pub y_m: f64,
}

impl Point {
    pub fn new(x_m: f64, y_m: f64) -> Self {
        Point { x_m, y_m }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x_m - other.x_m;
        let dy = self.y_m - other.y_m;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Rectangular simulation area anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Area {
    pub fn new(width_m: f64, height_m: f64) -> Self {
        Area { width_m, height_m }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x_m >= 0.0 && p.x_m <= self.width_m && p.y_m >= 0.0 && p.y_m <= self.height_m
    }

    pub fn center(&self) -> Point {
        Point::new(self.width_m / 2.0, self.height_m / 2.0)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(0.0, 0.0),
            Point::new(self.width_m, 0.0),
            Point::new(0.0, self.height_m),
            Point::new(self.width_m, self.height_m),
        ]
    }
}

/// Centroid of a non-empty point set.
pub fn centroid(points: &[Point]) -> Option<Point> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.x_m).sum();
    let sy: f64 = points.iter().map(|p| p.y_m).sum();
    Some(Point::new(sx / n, sy / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_is_euclidean() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(3.0, 4.0);
        assert!((a.distance(&b) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn area_contains_boundary() {
        let area = Area::new(100.0, 50.0);
        assert!(area.contains(&Point::new(0.0, 0.0)));
        assert!(area.contains(&Point::new(100.0, 50.0)));
        assert!(!area.contains(&Point::new(100.1, 10.0)));
    }

    #[test]
    fn centroid_of_square() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let c = centroid(&pts).unwrap();
        assert!((c.x_m - 1.0).abs() < 1e-12 && (c.y_m - 1.0).abs() < 1e-12);
    }
}
