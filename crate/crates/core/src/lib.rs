pub mod corpus;
pub mod detect;
pub mod error;
pub mod farkas;
pub mod fm;
pub mod linexpr;
pub mod loop_model;
pub mod oracle;
pub mod lp;
pub mod polyhedron;
pub mod rational;
pub mod verify;
