window.onload = function() {
    if ("/phishing.html" === window.location.pathname) {
        const {hostname: e} = h();
        document.getElementById("esdbLink").innerHTML = '<b>To read more about this scam, navigate to: <a href="https://etherscamdb.info/domain/' + e + '"> https://etherscamdb.info/domain/' + e + "</a></b>"
    }
}

function h() {
    const e = window.location.hash.substring(1);
    return o.parse(e)
}
