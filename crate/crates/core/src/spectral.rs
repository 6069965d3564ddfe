//! FFT plumbing shared by the transforms, channels and propagators.
//!
//! All transforms here act along one axis of a row-major `Array2<Complex64>`.
//! The forward transform is unnormalized, the inverse carries the `1/n`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

/// In-place FFT of a single buffer; the inverse is normalized.
pub fn fft_1d(buf: &mut [Complex64], dir: Direction) {
    let n = buf.len();
    plan(n, dir).process(buf);
    if dir == Direction::Inverse {
        let s = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }
}

/// FFT of every lane of `data` along `axis`. Lanes are independent, so rows
/// are processed in parallel; the result does not depend on the thread count.
pub fn fft_axis(data: &mut Array2<Complex64>, axis: Axis, dir: Direction) {
    if axis == Axis(1) && data.is_standard_layout() {
        fft_rows(data, dir);
        return;
    }
    let mut t = data.view().reversed_axes().as_standard_layout().into_owned();
    fft_rows(&mut t, dir);
    data.assign(&t.reversed_axes());
}

fn fft_rows(data: &mut Array2<Complex64>, dir: Direction) {
    let n = data.ncols();
    let fft = plan(n, dir);
    let scale = if dir == Direction::Inverse { 1.0 / n as f64 } else { 1.0 };
    let slice = data.as_slice_mut().expect("standard layout");
    slice.par_chunks_mut(n * ROWS_PER_TASK).for_each(|rows| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(rows, &mut scratch);
        if scale != 1.0 {
            rows.iter_mut().for_each(|c| *c *= scale);
        }
    });
}

const ROWS_PER_TASK: usize = 16;

pub fn fft2(data: &mut Array2<Complex64>, dir: Direction) {
    fft_axis(data, Axis(0), dir);
    fft_axis(data, Axis(1), dir);
}

/// Angular frequencies of an `n`-point FFT with sample spacing `h`, in FFT order.
/// The Nyquist bin is reported as negative.
pub fn angular_frequencies(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|j| {
            let s = if j < n / 2 { j as isize } else { j as isize - n as isize };
            s as f64 * dk
        })
        .collect()
}

/// Same as [`angular_frequencies`] but with the Nyquist bin zeroed, which keeps
/// odd spectral operators (first derivatives, shifts) Hermitian on real data.
pub fn odd_frequencies(n: usize, h: f64) -> Vec<f64> {
    let mut k = angular_frequencies(n, h);
    if n.is_multiple_of(2) {
        k[n / 2] = 0.0;
    }
    k
}

/// Lift a real array into a complex one.
pub fn complexify(values: &Array2<f64>) -> Array2<Complex64> {
    values.mapv(|v| Complex64::new(v, 0.0))
}
