//! Audio front-end: WAV I/O, log-Mel filterbank features, SpecAugment
//! masking, legacy frame stacking + decimation, and a binary feature
//! archive for moving features between pipeline stages.

mod archive;
mod augment;
mod logmel;
mod stack;
mod wav;

pub use archive::{read_feature_archive, write_feature_archive};
pub use augment::{spec_augment, SpecAugmentConfig};
pub use logmel::{
    logmel, mel_filterbank_centers_hz, FeatureMatrix, FRAME_LEN, FRAME_SHIFT, LOG_FLOOR,
    SAMPLE_RATE,
};
pub use stack::stack_and_decimate;
pub use wav::{load_wav, write_wav, Waveform};
