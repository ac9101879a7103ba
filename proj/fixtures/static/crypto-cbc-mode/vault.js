function openVault(blob, password) {
  var bytes = CryptoJS.AES.decrypt(blob, password, {mode: CryptoJS.mode.CBC, padding: CryptoJS.pad.Pkcs7});
  return bytes.toString(CryptoJS.enc.Utf8);
}
