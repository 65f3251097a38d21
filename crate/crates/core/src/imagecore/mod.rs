//! Pixel buffers, colour conversion and the filtering primitives shared by
//! the editing operators and the image statistics.

pub mod color;
pub mod filter;
mod image;
pub mod io;

pub use self::color::{lab_to_srgb, linear_to_srgb, srgb_to_lab, srgb_to_linear};
pub use self::filter::{gaussian_blur, gradient_magnitude, resize_bilinear};
pub use self::image::{quantize_u8, Encoding, Image, Mask, ScalarField};
pub use self::io::{decode_image, decode_image_bytes, encode_image, list_images};
