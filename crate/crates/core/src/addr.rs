//! Address value types and the byte-to-cell mappings that define plot geometry.
//!
//! A MAC address `aa:bb:cc:Y:X:z` lands on cell `(X, Y)` of its OUI's grid; the
//! sixth octet is never plotted, so each cell stands for 256 addresses. An IPv6
//! address inside a byte-aligned base prefix of length `8·B` lands on the cell
//! whose `y` is octet `B` and whose `x` is octet `B + 1`.

use std::fmt;
use std::net::Ipv6Addr;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddrError {
    #[error("invalid MAC address {input:?}: bad token {token:?}")]
    Mac { input: String, token: String },
    #[error("invalid IPv6 address {0:?}")]
    Ipv6(String),
    #[error("invalid IPv6 prefix {input:?}: {reason}")]
    Prefix { input: String, reason: &'static str },
    #[error("invalid OUI {0:?}")]
    Oui(String),
    #[error("{addr} is not inside {base}")]
    NotContained { addr: Ipv6Address, base: Ipv6Prefix },
    #[error("base prefix length /{0} cannot key a grid (must be a multiple of 8 and at most 112)")]
    UnsupportedBase(u8),
}

/// Bit 0x02 of the first octet: universal/local.
pub const LOCAL_BIT: u8 = 0x02;
/// Bit 0x01 of the first octet: individual/group.
pub const MULTICAST_BIT: u8 = 0x01;

/// 48-bit hardware address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacAddress(pub [u8; 6]);

impl MacAddress {
    pub const fn new(octets: [u8; 6]) -> Self {
        MacAddress(octets)
    }

    pub const fn octets(&self) -> [u8; 6] {
        self.0
    }

    pub fn oui(&self) -> Oui {
        oui_of(*self)
    }

    pub fn is_locally_assigned(&self) -> bool {
        is_locally_assigned(*self)
    }

    pub fn is_multicast(&self) -> bool {
        self.0[0] & MULTICAST_BIT != 0
    }

    /// The modified EUI-64 interface identifier (RFC 4291 appendix A).
    pub fn to_eui64(&self) -> [u8; 8] {
        let m = self.0;
        [m[0] ^ LOCAL_BIT, m[1], m[2], 0xff, 0xfe, m[3], m[4], m[5]]
    }

    /// Builds the SLAAC address for this MAC under the given /64 network.
    pub fn embed_in(&self, network: &Ipv6Prefix) -> Ipv6Address {
        let mut o = network.base.0;
        o[8..].copy_from_slice(&self.to_eui64());
        Ipv6Address(o)
    }
}

impl fmt::Display for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

impl FromStr for MacAddress {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_mac(s)
    }
}

fn parse_hex_groups<const N: usize>(text: &str) -> Result<[u8; N], String> {
    let sep = match (text.contains(':'), text.contains('-')) {
        (true, false) => ':',
        (false, true) => '-',
        // mixed or absent separators: report the whole input
        _ => return Err(text.to_string()),
    };
    let mut out = [0u8; N];
    let mut n = 0;
    for token in text.split(sep) {
        if n == N {
            return Err(token.to_string());
        }
        if token.len() != 2 || !token.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(token.to_string());
        }
        out[n] = u8::from_str_radix(token, 16).map_err(|_| token.to_string())?;
        n += 1;
    }
    if n != N {
        return Err(format!("{n} groups"));
    }
    Ok(out)
}

/// Parses six hex pairs joined uniformly by `:` or `-`, case-insensitively.
pub fn parse_mac(text: &str) -> Result<MacAddress, AddrError> {
    parse_hex_groups::<6>(text.trim())
        .map(MacAddress)
        .map_err(|token| AddrError::Mac {
            input: text.to_string(),
            token,
        })
}

/// First three octets of a MAC address (an MA-L block of 2^24 addresses).
///
/// MA-M and MA-S assignments are not modelled separately; they plot inside
/// the 3-octet block that contains them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Oui {
    #[serde(with = "oui_prefix_text")]
    pub prefix: [u8; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub org_name: Option<String>,
}

impl Oui {
    pub const fn new(prefix: [u8; 3]) -> Self {
        Oui {
            prefix,
            org_name: None,
        }
    }

    pub fn contains(&self, mac: &MacAddress) -> bool {
        mac.0[..3] == self.prefix
    }

    /// Filesystem-friendly form, e.g. `08-3c-0c`.
    pub fn slug(&self) -> String {
        let p = self.prefix;
        format!("{:02x}-{:02x}-{:02x}", p[0], p[1], p[2])
    }
}

impl fmt::Display for Oui {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prefix;
        write!(f, "{:02x}:{:02x}:{:02x}", p[0], p[1], p[2])
    }
}

impl FromStr for Oui {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex_groups::<3>(s.trim())
            .map(Oui::new)
            .map_err(|_| AddrError::Oui(s.to_string()))
    }
}

mod oui_prefix_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &[u8; 3], s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&format_args!("{:02x}:{:02x}:{:02x}", p[0], p[1], p[2]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 3], D::Error> {
        let s = String::deserialize(d)?;
        super::parse_hex_groups::<3>(&s)
            .map_err(|t| serde::de::Error::custom(format!("invalid OUI {s:?} at {t:?}")))
    }
}

pub fn oui_of(mac: MacAddress) -> Oui {
    Oui::new([mac.0[0], mac.0[1], mac.0[2]])
}

pub fn is_locally_assigned(mac: MacAddress) -> bool {
    mac.0[0] & LOCAL_BIT != 0
}

/// 128-bit IPv6 address. Text form is RFC 5952 (shortest, lowercase).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ipv6Address(pub [u8; 16]);

impl Ipv6Address {
    pub const UNSPECIFIED: Ipv6Address = Ipv6Address([0; 16]);

    pub const fn octets(&self) -> [u8; 16] {
        self.0
    }

    pub fn to_bits(&self) -> u128 {
        u128::from_be_bytes(self.0)
    }

    pub fn from_bits(bits: u128) -> Self {
        Ipv6Address(bits.to_be_bytes())
    }

    /// Zeroes every bit past the first `len`.
    pub fn truncate(&self, len: u8) -> Self {
        Ipv6Address::from_bits(self.to_bits() & prefix_mask(len))
    }
}

impl From<Ipv6Addr> for Ipv6Address {
    fn from(a: Ipv6Addr) -> Self {
        Ipv6Address(a.octets())
    }
}

impl From<Ipv6Address> for Ipv6Addr {
    fn from(a: Ipv6Address) -> Self {
        Ipv6Addr::from(a.0)
    }
}

impl fmt::Display for Ipv6Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Ipv6Addr::from(self.0), f)
    }
}

impl FromStr for Ipv6Address {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ipv6(s)
    }
}

/// Accepts the RFC 4291 text forms, including `::` compression.
pub fn parse_ipv6(text: &str) -> Result<Ipv6Address, AddrError> {
    Ipv6Addr::from_str(text.trim())
        .map(Ipv6Address::from)
        .map_err(|_| AddrError::Ipv6(text.to_string()))
}

fn prefix_mask(len: u8) -> u128 {
    match len {
        0 => 0,
        l if l >= 128 => u128::MAX,
        l => u128::MAX << (128 - l),
    }
}

/// CIDR block. The base never carries bits past `len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ipv6Prefix {
    base: Ipv6Address,
    len: u8,
}

#[allow(clippy::len_without_is_empty)]
impl Ipv6Prefix {
    pub fn new(base: Ipv6Address, len: u8) -> Result<Self, AddrError> {
        if len > 128 {
            return Err(AddrError::Prefix {
                input: format!("{base}/{len}"),
                reason: "length out of range",
            });
        }
        if base.truncate(len) != base {
            return Err(AddrError::Prefix {
                input: format!("{base}/{len}"),
                reason: "nonzero bits beyond prefix length",
            });
        }
        Ok(Ipv6Prefix { base, len })
    }

    /// The prefix of length `len` containing `addr`.
    pub fn containing(addr: Ipv6Address, len: u8) -> Self {
        let len = len.min(128);
        Ipv6Prefix {
            base: addr.truncate(len),
            len,
        }
    }

    pub fn base(&self) -> Ipv6Address {
        self.base
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn contains(&self, addr: &Ipv6Address) -> bool {
        addr.truncate(self.len) == self.base
    }

    /// Byte offset of the y octet when this prefix keys a grid.
    pub fn grid_octet(&self) -> Result<usize, AddrError> {
        if !self.len.is_multiple_of(8) || self.len > 112 {
            return Err(AddrError::UnsupportedBase(self.len));
        }
        Ok(usize::from(self.len / 8))
    }

    /// Filesystem-friendly form, e.g. `2a02-27b0-4a01--_48`.
    pub fn slug(&self) -> String {
        format!("{}_{}", self.base.to_string().replace(':', "-"), self.len)
    }
}

impl fmt::Display for Ipv6Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.base, self.len)
    }
}

impl FromStr for Ipv6Prefix {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_prefix(s)
    }
}

pub fn parse_prefix(text: &str) -> Result<Ipv6Prefix, AddrError> {
    let err = |reason| AddrError::Prefix {
        input: text.to_string(),
        reason,
    };
    let (addr, len) = text
        .trim()
        .split_once('/')
        .ok_or_else(|| err("missing '/'"))?;
    let base = parse_ipv6(addr).map_err(|_| err("bad address"))?;
    if len.is_empty() || !len.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err("bad length"));
    }
    let len: u8 = match len.parse() {
        Ok(l) if l <= 128 => l,
        _ => return Err(err("length out of range")),
    };
    if base.truncate(len) != base {
        return Err(err("nonzero bits beyond prefix length"));
    }
    Ok(Ipv6Prefix { base, len })
}

/// Recovers the MAC from a modified EUI-64 interface identifier, if the
/// low 64 bits carry the `ff:fe` marker in octets 11 and 12.
pub fn extract_mac_from_eui64(addr: Ipv6Address) -> Option<MacAddress> {
    let o = addr.0;
    if o[11] != 0xff || o[12] != 0xfe {
        return None;
    }
    Some(MacAddress([
        o[8] ^ LOCAL_BIT,
        o[9],
        o[10],
        o[13],
        o[14],
        o[15],
    ]))
}

/// A cell of the 256×256 plot. `x` is the column, `y` the row counted upward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellCoord {
    pub x: u8,
    pub y: u8,
}

impl CellCoord {
    pub const fn new(x: u8, y: u8) -> Self {
        CellCoord { x, y }
    }

    /// Row-major 16-bit offset `y·256 + x`.
    pub const fn offset(&self) -> u16 {
        (self.y as u16) << 8 | self.x as u16
    }

    pub const fn from_offset(o: u16) -> Self {
        CellCoord {
            x: (o & 0xff) as u8,
            y: (o >> 8) as u8,
        }
    }
}

/// y is the fourth octet, x the fifth.
pub fn mac_cell(mac: MacAddress) -> CellCoord {
    CellCoord::new(mac.0[4], mac.0[3])
}

pub fn v6_cell(addr: Ipv6Address, base: &Ipv6Prefix) -> Result<CellCoord, AddrError> {
    let b = base.grid_octet()?;
    if !base.contains(&addr) {
        return Err(AddrError::NotContained { addr, base: *base });
    }
    Ok(CellCoord::new(addr.0[b + 1], addr.0[b]))
}

macro_rules! serde_via_text {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_text!(MacAddress);
serde_via_text!(Ipv6Address);
serde_via_text!(Ipv6Prefix);

#[cfg(test)]
mod tests {
    use super::*;

    fn mac(s: &str) -> MacAddress {
        s.parse().unwrap()
    }

    fn v6(s: &str) -> Ipv6Address {
        s.parse().unwrap()
    }

    #[test]
    fn parse_mac_forms() {
        assert_eq!(
            mac("00:11:22:33:44:55").octets(),
            [0x00, 0x11, 0x22, 0x33, 0x44, 0x55]
        );
        assert_eq!(
            mac("08-3C-0C-aa-BB-cc").octets(),
            [0x08, 0x3C, 0x0C, 0xAA, 0xBB, 0xCC]
        );
        assert_eq!(mac("08-3C-0C-aa-BB-cc").to_string(), "08:3c:0c:aa:bb:cc");
    }

    #[test]
    fn parse_mac_rejects() {
        for bad in [
            "00:11:22:33:44",
            "00:11:22:33:44:55:66",
            "00:11:22-33:44:55",
            "001122334455",
            "00:11:22:33:44:5g",
            "0:11:22:33:44:55",
            "",
        ] {
            assert!(parse_mac(bad).is_err(), "{bad}");
        }
        match parse_mac("00:11:zz:33:44:55") {
            Err(AddrError::Mac { token, .. }) => assert_eq!(token, "zz"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_ipv6_forms() {
        let a = v6("2a02:27b0:4a01::");
        assert_eq!(&a.0[..6], &[0x2a, 0x02, 0x27, 0xb0, 0x4a, 0x01]);
        assert!(a.0[6..].iter().all(|&b| b == 0));
        assert_eq!(v6("::").0, [0; 16]);
        let b = v6("2001:3b0:22::1");
        let mut want = [0u8; 16];
        want[..6].copy_from_slice(&[0x20, 0x01, 0x03, 0xb0, 0x00, 0x22]);
        want[15] = 1;
        assert_eq!(b.0, want);
        assert_eq!(v6("2001:03B0:0022:0:0:0:0:1").to_string(), "2001:3b0:22::1");
        assert!(parse_ipv6("2001:db8::g").is_err());
        assert!(parse_ipv6("1::2::3").is_err());
    }

    #[test]
    fn rfc5952_text() {
        assert_eq!(v6("2001:db8:0:0:1:0:0:1").to_string(), "2001:db8::1:0:0:1");
        assert_eq!(
            v6("2001:db8:0:1:1:1:1:1").to_string(),
            "2001:db8:0:1:1:1:1:1"
        );
        assert_eq!(v6("2001:0db8::0001").to_string(), "2001:db8::1");
    }

    #[test]
    fn parse_prefix_cases() {
        let p = parse_prefix("2a02:27b0:4a01::/48").unwrap();
        assert_eq!(p.base(), v6("2a02:27b0:4a01::"));
        assert_eq!(p.len(), 48);
        let z = parse_prefix("::/0").unwrap();
        assert_eq!(z.base(), Ipv6Address::UNSPECIFIED);
        assert_eq!(z.len(), 0);
        assert!(parse_prefix("2a02:27b0:4a01:1::/48").is_err());
        assert!(parse_prefix("2a02:27b0:4a01::").is_err());
        assert!(parse_prefix("::/129").is_err());
        assert!(parse_prefix("::/-1").is_err());
        assert!(parse_prefix("::/").is_err());
    }

    #[test]
    fn oui_cases() {
        assert_eq!(oui_of(mac("08:3C:0C:12:34:56")).prefix, [0x08, 0x3c, 0x0c]);
        assert_eq!(oui_of(mac("00:00:00:00:00:00")).prefix, [0, 0, 0]);
        assert_eq!(oui_of(mac("00:27:15:FF:FF:FF")).prefix, [0x00, 0x27, 0x15]);
        assert_eq!(oui_of(mac("00:27:15:FF:FF:FF")).org_name, None);
        assert_eq!("08:3C:0C".parse::<Oui>().unwrap().to_string(), "08:3c:0c");
        assert!("08:3C".parse::<Oui>().is_err());
    }

    #[test]
    fn locally_assigned() {
        assert!(is_locally_assigned(mac("02:00:00:00:00:00")));
        assert!(!is_locally_assigned(mac("00:11:22:33:44:55")));
        assert_eq!(0xFEu8 & 0x02, 0x02);
        assert!(is_locally_assigned(mac("FE:11:22:33:44:55")));
    }

    #[test]
    fn eui64_extraction() {
        assert_eq!(
            extract_mac_from_eui64(v6("2001:db8::0211:22ff:fe33:4455")),
            Some(mac("00:11:22:33:44:55"))
        );
        assert_eq!(
            extract_mac_from_eui64(v6("fe80::0200:00ff:fe00:0001")),
            Some(mac("00:00:00:00:00:01"))
        );
        assert_eq!(extract_mac_from_eui64(v6("2001:db8::1")), None);
    }

    #[test]
    fn mac_cells() {
        assert_eq!(
            mac_cell(mac("00:11:22:33:44:55")),
            CellCoord::new(0x44, 0x33)
        );
        assert_eq!(mac_cell(mac("08:3C:0C:00:00:00")), CellCoord::new(0, 0));
        assert_eq!(
            mac_cell(mac("08:3C:0C:28:10:FF")),
            CellCoord::new(0x10, 0x28)
        );
    }

    #[test]
    fn v6_cells() {
        let base = parse_prefix("2a02:27b0:4a01::/48").unwrap();
        assert_eq!(
            v6_cell(v6("2a02:27b0:4a01:ab12::1"), &base).unwrap(),
            CellCoord::new(0x12, 0xab)
        );
        assert_eq!(v6_cell(base.base(), &base).unwrap(), CellCoord::new(0, 0));
        let sc = parse_prefix("2001:3b0:22::/48").unwrap();
        assert_eq!(
            v6_cell(v6("2001:3b0:22:ff00::"), &sc).unwrap(),
            CellCoord::new(0x00, 0xff)
        );
        assert!(matches!(
            v6_cell(v6("2001:3b0:23::"), &sc),
            Err(AddrError::NotContained { .. })
        ));
        let odd = parse_prefix("2001:3b0::/44").unwrap();
        assert_eq!(
            v6_cell(v6("2001:3b0::"), &odd),
            Err(AddrError::UnsupportedBase(44))
        );
        let long = parse_prefix("2001:3b0::/120").unwrap();
        assert_eq!(
            v6_cell(v6("2001:3b0::"), &long),
            Err(AddrError::UnsupportedBase(120))
        );
        // /56 base: y is octet 7, x octet 8
        let b56 = parse_prefix("2001:3b0:22:1100::/56").unwrap();
        assert_eq!(
            v6_cell(v6("2001:3b0:22:1134:5600::"), &b56).unwrap(),
            CellCoord::new(0x56, 0x34)
        );
    }

    #[test]
    fn slugs() {
        assert_eq!(
            parse_prefix("2a02:27b0:4a01::/48").unwrap().slug(),
            "2a02-27b0-4a01--_48"
        );
        assert_eq!(oui_of(mac("08:3c:0c:00:00:00")).slug(), "08-3c-0c");
    }
}
