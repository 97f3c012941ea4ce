//! Heisenberg group H₁ ≅ R³: group law, left-invariant frame, contact form.

use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn inverse(self) -> Self {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Left-invariant frame ê₁, ê₂, T₀ at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame3 {
    pub e1hat: Vec3,
    pub e2hat: Vec3,
    pub t0: Vec3,
}

pub fn group_multiply(p: Point3, q: Point3) -> Point3 {
    Point3 {
        x: p.x + q.x,
        y: p.y + q.y,
        z: p.z + q.z + p.y * q.x - p.x * q.y,
    }
}

pub fn left_frame(p: Point3) -> Frame3 {
    Frame3 {
        e1hat: [1.0, 0.0, p.y],
        e2hat: [0.0, 1.0, -p.x],
        t0: [0.0, 0.0, 1.0],
    }
}

/// Standard contact form Θ₀ = dz + x dy − y dx applied to `v` at `p`.
pub fn theta0_eval(p: Point3, v: Vec3) -> f64 {
    v[2] + p.x * v[1] - p.y * v[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn multiply_examples() {
        let a = Point3::new(1.5, -2.0, 0.25);
        assert_eq!(group_multiply(Point3::ORIGIN, a), a);
        assert_eq!(
            group_multiply(Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)),
            Point3::new(1.0, 1.0, -1.0)
        );
        assert_eq!(group_multiply(a, a.inverse()), Point3::ORIGIN);
    }

    #[test]
    fn frame_examples() {
        let f = left_frame(Point3::new(2.0, 3.0, 5.0));
        assert_eq!(f.e1hat, [1.0, 0.0, 3.0]);
        assert_eq!(f.e2hat, [0.0, 1.0, -2.0]);
        let o = left_frame(Point3::ORIGIN);
        assert_eq!(o.e1hat, [1.0, 0.0, 0.0]);
        assert_eq!(o.e2hat, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn contact_form_examples() {
        assert_eq!(
            theta0_eval(Point3::new(4.0, -1.0, 2.0), [0.0, 0.0, 1.0]),
            1.0
        );
        assert_eq!(
            theta0_eval(Point3::new(1.0, 0.0, 0.0), [0.0, 1.0, 0.0]),
            1.0
        );
        assert_eq!(
            theta0_eval(Point3::new(1.0, 2.0, 0.0), [1.0, 0.0, 2.0]),
            0.0
        );
    }

    fn pt() -> impl Strategy<Value = Point3> {
        (-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn associative(p in pt(), q in pt(), r in pt()) {
            let a = group_multiply(group_multiply(p, q), r);
            let b = group_multiply(p, group_multiply(q, r));
            let scale = 1.0 + p.x.abs().max(q.x.abs()).max(r.x.abs()).powi(2) * 10.0;
            prop_assert!((a.x - b.x).abs() < 1e-12 * scale);
            prop_assert!((a.y - b.y).abs() < 1e-12 * scale);
            prop_assert!((a.z - b.z).abs() < 1e-12 * scale * 100.0);
        }

        #[test]
        fn two_sided_identity(p in pt()) {
            prop_assert_eq!(group_multiply(Point3::ORIGIN, p), p);
            prop_assert_eq!(group_multiply(p, Point3::ORIGIN), p);
        }

        #[test]
        fn frame_is_legendrian(p in pt()) {
            let f = left_frame(p);
            prop_assert!(theta0_eval(p, f.e1hat).abs() < 1e-12);
            prop_assert!(theta0_eval(p, f.e2hat).abs() < 1e-12);
            prop_assert_eq!(theta0_eval(p, f.t0), 1.0);
        }
    }
}
