//! Operations on `K^n`: structure tensors, affine products, bracketings,
//! the built-in models and their symbolic forms.

pub mod models;
pub mod operation;
pub mod symbolic;
pub mod tensor;
pub mod vector;

pub use models::{builtin_matrix_formulation, builtin_model, Builtin, ModelSpec, ParamSet, PARAM_NAMES};
pub use operation::{AffineOperation, BracketTree};
pub use symbolic::{symbolic_components, Expression, SymbolicOperation};
pub use tensor::{associativity_check, matrix_to_tensor, MatrixFormulation, Mismatch, StructureTensor};
pub use vector::Vector;
