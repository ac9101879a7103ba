function toHex(bytes) {
  let out = "";
  for (let i = 0; i < bytes.length; i++) {
    out += (bytes[i] >>> 4).toString(16) + (bytes[i] & 15).toString(16);
  }
  return out;
}
function fromHex(s) {
  const b = new Uint8Array(s.length / 2);
  for (let i = 0; i < b.length; ++i) b[i] = parseInt(s.substr(i * 2, 2), 16);
  return b;
}
