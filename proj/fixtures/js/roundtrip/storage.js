const KEY = "wallet:state";
function save(state) {
  localStorage.setItem(KEY, JSON.stringify(state));
}
function load() {
  const raw = localStorage.getItem(KEY);
  return raw ? JSON.parse(raw) : {accounts: [], locked: true};
}
