pub mod catalog;
pub mod dynamics;
pub mod measure;
pub mod spectral;
pub mod tomography;
