pub mod error;
pub mod evt;
pub mod fading;
pub mod montecarlo;
pub mod policy;
pub mod quad;
pub mod sir;
pub mod special;
