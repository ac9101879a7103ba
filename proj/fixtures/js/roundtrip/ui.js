(function () {
  const rows = [];
  const render = (list) => list.map((r, i) => `<li data-i="${i}">${r.label}</li>`).join("");
  function refresh() {
    const el = document.getElementById("list");
    el.textContent = "";
    rows.forEach(function (r) {
      const li = document.createElement("li");
      li.textContent = r.label;
      el.appendChild(li);
    });
    return render(rows).length;
  }
  window.refreshList = refresh;
})();
