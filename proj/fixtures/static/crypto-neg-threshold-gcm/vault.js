async function unlockVault(password, salt, iv, data) {
  const base = await crypto.subtle.importKey("raw", new TextEncoder().encode(password), "PBKDF2", false, ["deriveKey"]);
  const key = await crypto.subtle.deriveKey({name: "PBKDF2", salt: salt, iterations: 10000, hash: "SHA-256"}, base,
    {name: "AES-GCM", length: 256}, false, ["decrypt"]);
  return crypto.subtle.decrypt({name: "AES-GCM", iv: iv}, key, data);
}
