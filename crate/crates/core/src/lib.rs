pub mod canon;
pub mod compiler;
pub mod decode;
pub mod diagnostics;
pub mod encoder;
pub mod error;
pub mod generate;
pub mod layout;
pub mod molecule;
pub mod par;
pub mod pb;
pub mod smarts;
pub mod smiles;
pub mod spec;
pub mod validator;
