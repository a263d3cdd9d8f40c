//! A small modeling language of communicating extended finite-state
//! machines, compiled to transition systems with failures.
//!
//! See [`parser`] for the syntax and [`compile`] for the semantics.

pub mod ast;
pub mod compile;
pub mod parser;

pub use ast::CefsmModel;
pub use compile::{compile, CompileError, CompileOptions, Compiled, StateDictionary};
pub use parser::{parse, ParseError};

/// Parses and compiles in one go.
pub fn compile_text(text: &str, options: CompileOptions) -> Result<Compiled, Error> {
    let model = parse(text)?;
    Ok(compile(&model, options)?)
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}
