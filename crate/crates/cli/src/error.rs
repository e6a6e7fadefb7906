//! Exit-code classification. Every failure maps to exactly one class.

use std::fmt;
use std::path::Path;

use orderless::dfs::{InvarianceError, OrderError};
use orderless::graph::GraphError;
use orderless::pipeline::PipelineError;
use orderless::recurrent::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    /// Bad flags or config values: exit 1.
    Usage = 1,
    /// Unreadable or invalid input data: exit 2.
    Data = 2,
    /// Failure while computing or writing results: exit 3.
    Runtime = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub class: ExitClass,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            class: ExitClass::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Failure {
        Failure {
            class: ExitClass::Data,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Failure {
        Failure {
            class: ExitClass::Runtime,
            message: message.into(),
        }
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(mut self, path: &Path) -> Failure {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    pub fn code(&self) -> u8 {
        self.class as u8
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn model_class(e: &ModelError) -> ExitClass {
    match e {
        ModelError::BadConfig(_) | ModelError::MaxLenTooSmall => ExitClass::Usage,
        ModelError::Checkpoint { .. } | ModelError::IdOutOfRange { .. } => ExitClass::Data,
        _ => ExitClass::Runtime,
    }
}

fn order_class(e: &OrderError) -> ExitClass {
    match e {
        OrderError::RootOutOfRange { .. } => ExitClass::Usage,
        _ => ExitClass::Data,
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        let class = match &e {
            PipelineError::Config { .. }
            | PipelineError::UnknownKey { .. }
            | PipelineError::Infeasible(_)
            | PipelineError::KTooLarge { .. } => ExitClass::Usage,
            PipelineError::TrajectoryFile { .. }
            | PipelineError::NotEnoughTrajectories(_)
            | PipelineError::EmptyEvaluationSet
            | PipelineError::Metrics { .. }
            | PipelineError::Graph(_)
            | PipelineError::Codec(_) => ExitClass::Data,
            PipelineError::Order(o) => order_class(o),
            PipelineError::Model(m) => model_class(m),
            PipelineError::Invariance(i) => invariance_class(i),
            PipelineError::Diverged { .. } | PipelineError::RetriesExhausted(_) | PipelineError::Io(_) => {
                ExitClass::Runtime
            }
        };
        Failure {
            class,
            message: e.to_string(),
        }
    }
}

fn invariance_class(e: &InvarianceError) -> ExitClass {
    match e {
        InvarianceError::Order(o) => order_class(o),
        InvarianceError::Codec(_) => ExitClass::Data,
        InvarianceError::Model(m) => model_class(m),
    }
}

impl From<InvarianceError> for Failure {
    fn from(e: InvarianceError) -> Failure {
        Failure {
            class: invariance_class(&e),
            message: e.to_string(),
        }
    }
}

impl From<OrderError> for Failure {
    fn from(e: OrderError) -> Failure {
        Failure {
            class: order_class(&e),
            message: e.to_string(),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Failure {
        Failure::data(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Failure {
        Failure {
            class: model_class(&e),
            message: e.to_string(),
        }
    }
}
