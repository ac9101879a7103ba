async function encryptVault(key, data) {
  const iv = crypto.getRandomValues(new Uint8Array(12));
  const enc = new TextEncoder().encode(JSON.stringify(data));
  const ct = await crypto.subtle.encrypt({name: "AES-GCM", iv}, key, enc);
  return {iv: Array.from(iv), ct: Array.from(new Uint8Array(ct))};
}
