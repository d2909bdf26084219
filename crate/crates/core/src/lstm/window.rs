use crate::encoder::EncodedStream;

/// A fixed-length input sequence for the network.
///
/// Only the first `valid` steps carry events; the remaining steps up to
/// `steps` are zero padding with mask `false`. Targets are `(omega, 0)` on
/// boundary events and `(0, 1)` elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct WindowSample<'a> {
    inputs: &'a [f64],
    labels: Option<&'a [bool]>,
    width: usize,
    steps: usize,
    omega: f64,
}

impl<'a> WindowSample<'a> {
    /// `inputs` is `valid * width` row-major values with `valid <= steps`.
    pub fn new(inputs: &'a [f64], width: usize, steps: usize) -> Self {
        assert!(width > 0 && inputs.len().is_multiple_of(width), "ragged window inputs");
        assert!(inputs.len() / width <= steps, "window longer than its step count");
        WindowSample {
            inputs,
            labels: None,
            width,
            steps,
            omega: 1.0,
        }
    }

    /// Attaches per-event boundary labels (one per valid step) and the
    /// boundary target weight.
    pub fn with_labels(mut self, labels: &'a [bool], omega: f64) -> Self {
        assert_eq!(labels.len(), self.valid(), "one label per valid step");
        self.labels = Some(labels);
        self.omega = omega;
        self
    }

    /// Window over `encoded[start..start + steps]`, truncated at the end of
    /// the stream.
    pub fn from_stream(encoded: &'a EncodedStream, start: usize, steps: usize) -> Self {
        let end = (start + steps).min(encoded.len());
        WindowSample::new(encoded.rows(start..end), encoded.width(), steps)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of unmasked steps.
    pub fn valid(&self) -> usize {
        self.inputs.len() / self.width
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn mask(&self, step: usize) -> bool {
        step < self.valid()
    }

    /// Input at `step`, or `None` on padding.
    pub fn input(&self, step: usize) -> Option<&'a [f64]> {
        self.mask(step)
            .then(|| &self.inputs[step * self.width..(step + 1) * self.width])
    }

    pub fn is_boundary(&self, step: usize) -> bool {
        self.labels
            .and_then(|l| l.get(step).copied())
            .unwrap_or(false)
    }

    /// Target vector; padding steps report `(0, 1)` but carry no loss.
    pub fn target(&self, step: usize) -> [f64; 2] {
        if self.is_boundary(step) {
            [self.omega, 0.0]
        } else {
            [0.0, 1.0]
        }
    }
}
