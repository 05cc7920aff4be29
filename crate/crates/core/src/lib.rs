//! Gesture and color-marker perception engine with an IoT lab control plane.

pub mod classifier;
pub mod controlplane;
pub mod debounce;
pub mod imaging;
pub mod markers;
pub mod pipeline;
pub mod segmentation;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/color-spaces.md")]
    mod color_spaces {}
    #[doc = include_str!("../../../book/src/blobs.md")]
    mod blobs {}
    #[doc = include_str!("../../../book/src/classifier.md")]
    mod classifier {}
    #[doc = include_str!("../../../book/src/debouncing.md")]
    mod debouncing {}
    #[doc = include_str!("../../../book/src/markers.md")]
    mod markers {}
    #[doc = include_str!("../../../book/src/control-plane.md")]
    mod control_plane {}
}
