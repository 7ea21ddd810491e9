#![no_main]

use libfuzzer_sys::fuzz_target;
use recurve::vision::netpbm::{decode, encode_gray, encode_rgb, Pnm};

fuzz_target!(|data: &[u8]| {
    // Whatever decodes must re-encode to a file that decodes to the same image.
    if let Ok(img) = decode(data) {
        let bytes = match &img {
            Pnm::Gray(g) => encode_gray(g),
            Pnm::Rgb(c) => encode_rgb(c),
        };
        assert_eq!(decode(&bytes).unwrap(), img);
    }
});
