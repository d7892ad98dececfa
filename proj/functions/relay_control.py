# fnfleet-sim: relay-control
# Deployed: holds the relay pin. Agent actions call: relay_control.py on|off
import sys, time

PIN = 17
STATE = "/tmp/fnfleet-relay.state"


def switch(on):
    try:
        import RPi.GPIO as GPIO
        GPIO.setmode(GPIO.BCM)
        GPIO.setup(PIN, GPIO.OUT)
        GPIO.output(PIN, GPIO.HIGH if on else GPIO.LOW)
    except ImportError:
        pass
    with open(STATE, "w") as out:
        out.write("on" if on else "off")


if len(sys.argv) >= 2 and sys.argv[1] in ("on", "off"):
    switch(sys.argv[1] == "on")
else:
    while True:
        time.sleep(3600)
