//! Scripted reconstruction/timing experiments with CSV output.
//!
//! Timings cover the full moment computation (basis evaluation plus
//! accumulation) and are the median of at least three runs; absolute values
//! are hardware-dependent, so only orderings and error levels are
//! meaningful. Benchmarks run single-threaded.

use std::time::Instant;

use crate::error::Result;
use crate::imageio::{model_image, GrayImage};
use crate::moments::{
    discrete_chebyshev_moments, legendre_moments, legendre_moments_closed_form, reconstruct,
    reconstruction_error, MomentMatrix,
};

/// The three benchmarked moment pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineId {
    RecurrenceLegendre,
    ClosedFormLegendre,
    DiscreteChebyshev,
}

impl PipelineId {
    pub const ALL: [PipelineId; 3] = [
        PipelineId::RecurrenceLegendre,
        PipelineId::ClosedFormLegendre,
        PipelineId::DiscreteChebyshev,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            PipelineId::RecurrenceLegendre => "recurrence-Legendre",
            PipelineId::ClosedFormLegendre => "closed-form-Legendre",
            PipelineId::DiscreteChebyshev => "discrete-Chebyshev",
        }
    }

    fn run(&self, image: &GrayImage, order: usize) -> Result<MomentMatrix> {
        match self {
            PipelineId::RecurrenceLegendre => legendre_moments(image, order),
            PipelineId::ClosedFormLegendre => legendre_moments_closed_form(image, order),
            PipelineId::DiscreteChebyshev => discrete_chebyshev_moments(image, order),
        }
    }
}

/// One measured point: pipeline, moment count, image size, median wall time
/// of the moment computation and the reconstruction error.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub pipeline: PipelineId,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub seconds: f64,
    pub error: f64,
}

/// Serialize records as `pipeline,n,rows,cols,seconds,error` CSV.
pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("pipeline,n,rows,cols,seconds,error\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{:.6e},{:.16e}\n",
            r.pipeline.id(),
            r.n,
            r.rows,
            r.cols,
            r.seconds,
            r.error
        ));
    }
    out
}

const TIMING_RUNS: usize = 3;

fn median_time<F: FnMut() -> Result<MomentMatrix>>(mut f: F) -> Result<(MomentMatrix, f64)> {
    let mut times = Vec::with_capacity(TIMING_RUNS);
    let mut result = None;
    for _ in 0..TIMING_RUNS {
        let start = Instant::now();
        let mm = f()?;
        times.push(start.elapsed().as_secs_f64());
        result = Some(mm);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    Ok((result.expect("at least one run"), times[TIMING_RUNS / 2]))
}

/// Run every pipeline over the size/order grid on the synthetic model
/// image, recording median moment-computation time and reconstruction
/// error.
pub fn reconstruction_sweep(sizes: &[usize], n_values: &[usize]) -> Result<Vec<BenchRecord>> {
    run_sweep(sizes, n_values, PipelineId::ALL.as_slice())
}

/// Sweep restricted to chosen pipelines (the timing suite skips the
/// discrete pipeline when only the Legendre ordering is of interest).
pub fn run_sweep(
    sizes: &[usize],
    n_values: &[usize],
    pipelines: &[PipelineId],
) -> Result<Vec<BenchRecord>> {
    let mut records = Vec::new();
    for &size in sizes {
        let image = model_image(size, size)?;
        for &pipeline in pipelines {
            for &n in n_values {
                let (moments, seconds) = median_time(|| pipeline.run(&image, n))?;
                let (rows, cols) = moments.source_dims();
                let trimmed = image
                    .intensities()
                    .slice(ndarray::s![..rows, ..cols])
                    .to_owned();
                let reference = GrayImage::from_raw(trimmed);
                let rec = reconstruct(&moments, rows, cols)?;
                let error = reconstruction_error(&reference, &rec)?;
                records.push(BenchRecord { pipeline, n, rows: size, cols: size, seconds, error });
            }
        }
    }
    Ok(records)
}
