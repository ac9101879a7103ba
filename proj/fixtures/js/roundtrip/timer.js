var idle = 0, limit = 5 * 60;
setInterval(function () {
  idle += 1;
  if (idle >= limit && !window.locked) {
    window.locked = true;
    chrome.runtime.sendMessage({type: "lock"});
  }
}, 1000);
document.onmousemove = document.onkeydown = function () {
  idle = 0;
};
