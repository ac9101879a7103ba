function page() {
  return window.location.pathname.split("/").pop();
}
document.getElementById("crumb").innerHTML = "<i>" + page() + "</i>";
