pub mod error;
pub mod linalg;
pub mod states;
pub mod optim;
pub mod channels;
pub mod state_measures;
pub mod channel_measures;
pub mod oracle;
pub mod properties;
pub mod cli;
