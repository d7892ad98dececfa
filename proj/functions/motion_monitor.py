# fnfleet-sim: motion-monitor args=port,interval
# Polls the PIR sensor every <interval> sec, pushes to the agent.
import json, os, sys, time, urllib.request

AGENT = os.environ.get("FNFLEET_AGENT", "http://127.0.0.1:9000")

def reader(port):
    try:
        import RPi.GPIO as GPIO
        GPIO.setmode(GPIO.BCM)
        GPIO.setup(port, GPIO.IN)
        return lambda: GPIO.input(port)
    except ImportError:
        return lambda: 0

def push(samples):
    body = json.dumps({"metric": "motion", "samples": samples}).encode()
    req = urllib.request.Request(AGENT + "/telemetry", body)
    try:
        urllib.request.urlopen(req, timeout=10).close()
        return []
    except OSError:
        return samples[-1000:]

def main():
    port, interval = int(sys.argv[1]), float(sys.argv[2])
    read, pending = reader(port), []
    while True:
        t = time.strftime("%Y-%m-%dT%H:%M:%S.000Z", time.gmtime())
        pending = push(pending + [{"timestamp": t, "value": read()}])
        time.sleep(interval)

main()
