//! Round trip through the on-disk text formats used by the CLI.

use stuckat::harness::formats::{
    image_from_str, image_to_string, message_from_str, message_to_string, meta_from_str,
    meta_to_string, stored_from_str, stored_to_string, CodecProfile, StoredFile,
};
use stuckat::{BitVector, FrozenSet, MemoryImage, ParamProfile, SideChannelCodec};

fn main() -> stuckat::Result<()> {
    let n = 256;
    let image = MemoryImage::new(
        (0..n).map(|i| i % 3 == 0).collect(),
        FrozenSet::new(n, [4, 9, 100])?,
    )?;
    let text = image_to_string(&image);
    print!(
        "{}",
        text.lines()
            .take(3)
            .map(|l| format!("{l}\n"))
            .collect::<String>()
    );
    assert_eq!(image_from_str(&text)?, image);

    let msg = BitVector::parse_binary("1101001")?;
    assert_eq!(message_from_str(&message_to_string(&msg))?, msg);

    let profile = ParamProfile::new(n, 4)?;
    let codec = SideChannelCodec::new(profile.clone())?;
    let enc = codec.encode(&image, &msg, &mut rand::thread_rng())?;
    let stored = StoredFile {
        profile: CodecProfile::Sidechannel(profile.clone()),
        stored: enc.stored,
    };
    let stored_text = stored_to_string(&stored)?;
    let meta_text = meta_to_string(&enc.meta, &profile);
    println!("{}", meta_text.trim_end());

    let back = stored_from_str(&stored_text)?;
    let meta = meta_from_str(&meta_text, &profile)?;
    assert_eq!(codec.decode(&back.stored, &meta)?, msg);
    println!("files round trip");
    Ok(())
}
