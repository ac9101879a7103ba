document.addEventListener("DOMContentLoaded", function () {
  var btn = document.getElementById("unlock");
  btn.addEventListener("click", async () => {
    const pw = document.querySelector("#pw").value;
    try {
      await chrome.runtime.sendMessage({type: "unlock", pw});
      window.location.href = "home.html";
    } catch (e) {
      document.getElementById("err").textContent = e.message || "failed";
    }
  });
});
