#![no_main]

use libfuzzer_sys::fuzz_target;
use memlab::imagecore::decode_image_bytes;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_image_bytes(data) {
        assert_eq!(img.as_bytes().unwrap().len(), img.width() * img.height() * 3);
    }
});
