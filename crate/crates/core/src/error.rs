//! Error types shared across the crate.
//!
//! Input and format problems are separated from numerical kernel failures so
//! callers (in particular the command line tool) can map them to distinct
//! exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One problem found while validating a mesh.
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationIssue {
    /// A vertex coordinate or tensor component is NaN or infinite.
    NonFiniteValue { index: usize },
    /// A triangle references a vertex index outside the vertex list.
    IndexOutOfRange { triangle: usize, index: usize },
    /// Triangle with |signed area| at or below the degeneracy threshold.
    DegenerateTriangle { triangle: usize, area: f64 },
    /// Vertex and tensor counts disagree.
    CountMismatch { vertices: usize, tensors: usize },
    /// The mesh has no triangles.
    Empty,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NonFiniteValue { index } => {
                write!(f, "non-finite coordinate or tensor at vertex {index}")
            }
            Self::IndexOutOfRange { triangle, index } => {
                write!(f, "triangle {triangle} references missing vertex {index}")
            }
            Self::DegenerateTriangle { triangle, area } => {
                write!(f, "triangle {triangle} is degenerate (signed area {area:e})")
            }
            Self::CountMismatch { vertices, tensors } => {
                write!(f, "{vertices} vertices but {tensors} tensors")
            }
            Self::Empty => write!(f, "mesh has no triangles"),
        }
    }
}

/// Outcome of mesh validation: all issues found, plus how many triangles were
/// reoriented to counterclockwise order during ingestion.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
    pub reoriented: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.issues.is_empty() {
            write!(f, "mesh valid ({} triangles reoriented)", self.reoriented)
        } else {
            write!(f, "{} issue(s): ", self.issues.len())?;
            for (i, issue) in self.issues.iter().enumerate() {
                if i > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "{issue}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Mesh failed validation; carries every issue found.
    #[error("invalid mesh: {0}")]
    InvalidMesh(ValidationReport),

    /// Input file or configuration could not be understood.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A degenerate (parallel-gradient) quadric has no critical point.
    #[error("quadric has no isolated critical point (degenerate kind)")]
    NoCriticalPoint,

    /// A numerical kernel produced an inconsistent intermediate result.
    #[error("numerical kernel failure: {0}")]
    Kernel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than kernel breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Self::InvalidMesh(_) | Self::InvalidInput(_) | Self::Io(_) | Self::Json(_) | Self::Csv(_)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_formats_issues() {
        let report = ValidationReport {
            issues: vec![ValidationIssue::Empty],
            reoriented: 0,
        };
        assert!(!report.is_valid());
        assert!(report.to_string().contains("no triangles"));
        assert!(Error::InvalidMesh(report).is_input_error());
        assert!(!Error::NoCriticalPoint.is_input_error());
    }
}
