//! Constant-velocity Kalman filter over boxes, parameterized as in SORT.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::BBox;

type Vec7 = SVector<f64, 7>;
type Mat7 = SMatrix<f64, 7, 7>;
type Mat4 = SMatrix<f64, 4, 4>;
type Mat4x7 = SMatrix<f64, 4, 7>;

/// Observation noise on (u, v, s, r).
pub const MEASUREMENT_NOISE: [f64; 4] = [1.0, 1.0, 10.0, 10.0];
/// Initial state variance: positions 10, velocities 10 * 1000.
pub const INITIAL_VARIANCE: [f64; 7] = [10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4];
/// Process noise diagonal.
pub const PROCESS_NOISE: [f64; 7] = [1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4];

/// State `[u, v, s, r, du, dv, ds]`: center, area, aspect ratio (w/h), and
/// per-frame velocities of the first three.
#[derive(Debug, Clone)]
pub struct KalmanState {
    pub x: Vec7,
    pub p: Mat7,
}

fn to_measurement(b: &BBox) -> SVector<f64, 4> {
    let (w, h) = (b.width(), b.height());
    let (u, v) = b.center();
    let r = if h > 0.0 { w / h } else { 0.0 };
    SVector::<f64, 4>::new(u, v, w * h, r)
}

fn transition() -> Mat7 {
    let mut f = Mat7::identity();
    f[(0, 4)] = 1.0;
    f[(1, 5)] = 1.0;
    f[(2, 6)] = 1.0;
    f
}

fn observation() -> Mat4x7 {
    let mut h = Mat4x7::zeros();
    for i in 0..4 {
        h[(i, i)] = 1.0;
    }
    h
}

impl KalmanState {
    pub fn new(b: &BBox) -> Self {
        let z = to_measurement(b);
        let mut x = Vec7::zeros();
        x.fixed_rows_mut::<4>(0).copy_from(&z);
        KalmanState { x, p: Mat7::from_diagonal(&Vec7::from(INITIAL_VARIANCE)) }
    }

    /// Advances one frame.
    pub fn predict(&mut self) {
        if self.x[6] + self.x[2] <= 0.0 {
            self.x[6] = 0.0;
        }
        let f = transition();
        self.x = f * self.x;
        self.p = f * self.p * f.transpose() + Mat7::from_diagonal(&Vec7::from(PROCESS_NOISE));
    }

    pub fn update(&mut self, b: &BBox) {
        let z = to_measurement(b);
        let h = observation();
        let r = Mat4::from_diagonal(&SVector::<f64, 4>::from(MEASUREMENT_NOISE));
        let y = z - h * self.x;
        let s = h * self.p * h.transpose() + r;
        let Some(s_inv) = s.try_inverse() else { return };
        let k = self.p * h.transpose() * s_inv;
        self.x += k * y;
        // Joseph form keeps P symmetric positive semi-definite
        let i_kh = Mat7::identity() - k * h;
        self.p = i_kh * self.p * i_kh.transpose() + k * r * k.transpose();
    }

    pub fn to_box(&self) -> BBox {
        let (u, v, s, r) = (self.x[0], self.x[1], self.x[2], self.x[3]);
        let (w, h) = if s > 0.0 && r > 0.0 {
            let w = (s * r).sqrt();
            (w, s / w)
        } else {
            (0.0, 0.0)
        };
        BBox { x1: u - w / 2.0, y1: v - h / 2.0, x2: u + w / 2.0, y2: v + h / 2.0 }
    }
}

/// Forecasts the box at `target` from observations at strictly increasing
/// frames, predicting once per elapsed frame and updating at each observation.
pub fn kf_forecast(history: &[(u32, BBox)], target: u32) -> Result<BBox> {
    let Some(&(first_frame, first_box)) = history.first() else {
        return Err(Error::input("Kalman forecast needs at least one observation"));
    };
    if history.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::input("Kalman history frames must be strictly increasing"));
    }
    let last = history.last().unwrap().0;
    if target < last {
        return Err(Error::input(format!("forecast target {target} precedes last observation {last}")));
    }
    if history.len() == 1 {
        return Ok(first_box);
    }
    let mut kf = KalmanState::new(&first_box);
    let mut frame = first_frame;
    for &(f, b) in &history[1..] {
        for _ in frame..f {
            kf.predict();
        }
        kf.update(&b);
        frame = f;
    }
    for _ in frame..target {
        kf.predict();
    }
    Ok(kf.to_box())
}
