//! Flat parameter storage with a named segment layout.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn new(name: &str, rows: usize, cols: usize) -> Self {
        Self { name: name.to_string(), rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A flat vector of 64-bit reals with an ordered list of named segments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub layout: Vec<Segment>,
}

impl ParamVector {
    pub fn zeros(layout: Vec<Segment>) -> Self {
        let n = layout.iter().map(Segment::len).sum();
        Self { values: vec![0.0; n], layout }
    }

    pub fn from_parts(values: Vec<f64>, layout: Vec<Segment>) -> Result<Self> {
        let n: usize = layout.iter().map(Segment::len).sum();
        if n != values.len() {
            return Err(Error::DimensionMismatch { expected: n, got: values.len() });
        }
        Ok(Self { values, layout })
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.layout.clone())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn offset_of(&self, name: &str) -> Option<usize> {
        let mut off = 0;
        for s in &self.layout {
            if s.name == name {
                return Some(off);
            }
            off += s.len();
        }
        None
    }

    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        let off = self.offset_of(name)?;
        let len = self.layout.iter().find(|s| s.name == name)?.len();
        Some(&self.values[off..off + len])
    }

    pub fn segment_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let off = self.offset_of(name)?;
        let len = self.layout.iter().find(|s| s.name == name)?.len();
        Some(&mut self.values[off..off + len])
    }

    /// Segment name and index within it for a flat coordinate.
    pub fn coordinate_name(&self, mut index: usize) -> (String, usize) {
        for s in &self.layout {
            if index < s.len() {
                return (s.name.clone(), index);
            }
            index -= s.len();
        }
        ("<out of range>".to_string(), index)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.layout == other.layout
    }
}
