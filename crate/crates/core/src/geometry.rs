//! Planar poses and angle helpers.

use std::f64::consts::PI;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.sin().atan2(angle.cos());
    if wrapped <= -PI {
        PI
    } else {
        wrapped
    }
}

/// Circular mean of a set of angles, `None` when the resultant vanishes.
pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (s, c, n) = angles
        .into_iter()
        .fold((0.0, 0.0, 0usize), |(s, c, n), a| (s + a.sin(), c + a.cos(), n + 1));
    if n == 0 || (s * s + c * c).sqrt() < 1e-12 * n as f64 {
        return None;
    }
    Some(wrap_angle(s.atan2(c)))
}

/// Position and heading in the world frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> Point2<f64> {
        Point2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vector2<f64> {
        Vector2::new(self.theta.cos(), self.theta.sin())
    }

    pub fn distance_to(&self, p: &Point2<f64>) -> f64 {
        (self.position() - p).norm()
    }

    /// Expresses `p` in this pose's frame: (forward, left).
    pub fn to_local(&self, p: &Point2<f64>) -> Vector2<f64> {
        let d = p - self.position();
        let (s, c) = self.theta.sin_cos();
        Vector2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }
}
