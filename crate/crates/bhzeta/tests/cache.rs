use bhzeta::cache::{self, decode, encode, file_name};
use bhzeta_core::padic::GammaTable;

#[test]
fn round_trip() {
    let t = GammaTable::build(13, 6).unwrap();
    let bytes = encode(&t);
    assert_eq!(&bytes[..4], b"BHZC");
    let back = decode(&bytes, 13, 6).unwrap();
    assert_eq!(back.values, t.values);
    assert_eq!(encode(&back), bytes);
}

#[test]
fn rejects_damage_and_wrong_headers() {
    let bytes = encode(&GammaTable::build(13, 6).unwrap());
    assert!(decode(&bytes, 13, 7).unwrap_err().contains("header"));
    assert!(decode(&bytes, 17, 6).unwrap_err().contains("header"));
    let mut flipped = bytes.clone();
    flipped[40] ^= 1;
    assert_eq!(decode(&flipped, 13, 6).unwrap_err(), "checksum mismatch");
    assert_eq!(decode(&bytes[..bytes.len() - 1], 13, 6).unwrap_err(), "checksum mismatch");
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert_eq!(decode(&magic, 13, 6).unwrap_err(), "bad magic");
    assert!(decode(b"BHZC", 13, 6).is_err());
}

#[test]
fn directory_cache() {
    let dir = tempfile::tempdir().unwrap();
    let a = cache::gamma_table(31, 5, Some(dir.path())).unwrap();
    let path = dir.path().join(file_name(31, 5));
    assert!(path.exists());
    let b = cache::gamma_table(31, 5, Some(dir.path())).unwrap();
    assert_eq!(a.values, b.values);
    let mut bytes = std::fs::read(&path).unwrap();
    let k = bytes.len() / 2;
    bytes[k] ^= 0xff;
    std::fs::write(&path, bytes).unwrap();
    let e = cache::gamma_table(31, 5, Some(dir.path())).unwrap_err();
    assert_eq!(e.code(), "cache.invalid");
}
