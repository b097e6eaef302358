pub mod numerics;
pub mod rotation;
pub mod orlicz;
pub mod expr;
pub mod blockseq;
pub mod levelset;
pub mod divergence;
pub mod cli;
