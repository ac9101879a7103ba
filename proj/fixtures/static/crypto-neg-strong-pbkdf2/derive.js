function a(e, t) {
  var n = this, r = window, o = new TextEncoder().encode(e), i = t;
  return r.crypto.subtle.importKey("raw", o, {name: "PBKDF2"}, !1, ["deriveBits", "deriveKey"]).then((function(e) {
    return r.crypto.subtle.deriveKey({name: "PBKDF2", salt: i, iterations: 600000, hash: "SHA-256"}, e, {name: "AES-GCM", length: 256}, !1, ["encrypt", "decrypt"])
  }))
}
