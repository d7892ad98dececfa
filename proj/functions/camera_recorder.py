# fnfleet-sim: camera-recorder
# Deployed: stays resident as the device's recorder.
# Invoked by an agent action: camera_recorder.py record <seconds> [outdir]
import os, sys, time


def record(seconds, outdir):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "rec-%d.h264" % int(time.time()))
    try:
        from picamera import PiCamera
        with PiCamera() as camera:
            camera.start_recording(path)
            camera.wait_recording(seconds)
            camera.stop_recording()
    except ImportError:
        with open(path, "wb") as out:
            out.write(b"\0" * int(seconds * 1000))
    print(path)


if len(sys.argv) >= 3 and sys.argv[1] == "record":
    record(float(sys.argv[2]), sys.argv[3] if len(sys.argv) > 3 else "recordings")
else:
    while True:
        time.sleep(3600)
