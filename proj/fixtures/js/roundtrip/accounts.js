var accounts = [];
function addAccount(name, address) {
  if (!/^0x[0-9a-fA-F]{40}$/.test(address)) throw new Error("bad address");
  accounts.push({name: name || `Account ${accounts.length + 1}`, address, balance: 0n});
  return accounts.length - 1;
}
function rename(i, name) {
  const a = accounts[i];
  if (a === undefined) return false;
  a.name = name;
  return true;
}
