var banner = "<b>" + "Welcome back" + "</b>";
document.getElementById("title").innerHTML = banner;
var tag = window.location.hash.substring(1);
document.getElementById("tag").textContent = tag;
